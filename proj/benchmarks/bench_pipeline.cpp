#include <benchmark/benchmark.h>

#include <sstream>

#include "tracelens/abstractor.hpp"
#include "tracelens/constraints.hpp"
#include "tracelens/flight_demo.hpp"
#include "tracelens/miners.hpp"
#include "tracelens/trace.hpp"

using namespace tracelens;

namespace {

ConcreteTrace long_flight(int ticks) {
  demo::FlightScenario s;
  s.name = demo::Scenario::kFullFlight;
  s.params.ticks = ticks;
  return demo::run_scenario(s);
}

MonitorConfig gear_config() {
  MonitorConfig c;
  c.name = "bench";
  c.fields = {"gear", "speed", "takeOffSpeed", "altitude", "groundAlt", "safeAltForGearRetract"};
  c.functions = {"accelerate", "takeoff", "retractGear"};
  c.constraints = {parse_constraint("value_change(gear)"),
                   parse_constraint("cmp(speed, takeOffSpeed)"),
                   parse_constraint("range(altitude, groundAlt, safeAltForGearRetract)")};
  return c;
}

void BM_ParseTrace(benchmark::State& state) {
  std::string text = serialize_trace(long_flight(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    auto t = parse_trace_text(text, "bench");
    benchmark::DoNotOptimize(t.events.size());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseTrace)->Arg(1000)->Arg(10000);

void BM_FilterTrace(benchmark::State& state) {
  auto trace = long_flight(static_cast<int>(state.range(0)));
  auto config = gear_config();
  for (auto _ : state) {
    auto f = filter_trace(trace, config);
    benchmark::DoNotOptimize(f.steps.size());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * trace.events.size()));
}
BENCHMARK(BM_FilterTrace)->Arg(1000)->Arg(10000);

void BM_BuildModel(benchmark::State& state) {
  auto config = gear_config();
  auto filtered = filter_trace(long_flight(static_cast<int>(state.range(0))), config);
  for (auto _ : state) {
    auto m = build_model({filtered}, config);
    benchmark::DoNotOptimize(m.states.size());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * filtered.steps.size()));
}
BENCHMARK(BM_BuildModel)->Arg(1000)->Arg(10000);

std::vector<LabelSequence> cyclic_sequences(std::size_t length) {
  static const char* kLabels[] = {"a", "b", "c", "a", "d"};
  LabelSequence seq;
  for (std::size_t i = 0; i < length; ++i) seq.push_back(kLabels[(i * 7 + i / 3) % 5]);
  return {seq};
}

void BM_KTails(benchmark::State& state) {
  Fsm pta = build_pta(cyclic_sequences(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    auto m = ktails(pta, 2, true);
    benchmark::DoNotOptimize(m.state_count);
  }
}
BENCHMARK(BM_KTails)->Arg(1000)->Arg(10000);

void BM_RedBlue(benchmark::State& state) {
  Fsm pta = build_pta(cyclic_sequences(static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) {
    auto m = redblue(pta);
    benchmark::DoNotOptimize(m.state_count);
  }
}
BENCHMARK(BM_RedBlue)->Arg(200)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();

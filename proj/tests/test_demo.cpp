#include "doctest.h"
#include "support.hpp"
#include "tracelens/error.hpp"

using namespace tracelens;

namespace {

std::vector<Value> column(const ConcreteTrace& t, const std::string& field) {
  std::size_t i = *t.field_index(field);
  std::vector<Value> out;
  for (const auto& e : t.events) out.push_back(e.vars[i]);
  return out;
}

int changes(const std::vector<Value>& col) {
  int n = 0;
  for (std::size_t i = 1; i < col.size(); ++i) n += col[i] != col[i - 1];
  return n;
}

}  // namespace

TEST_SUITE("demo") {
  TEST_CASE("takeoff: one sign change of altitude, never zero") {
    auto t = testing::demo_trace(demo::Scenario::kTakeoff);
    auto alt = column(t, "altitude");
    CHECK(alt.front() == Value(-1.0));
    int sign_changes = 0;
    for (std::size_t i = 1; i < alt.size(); ++i) {
      CHECK(alt[i].as_double() != 0.0);
      sign_changes += (alt[i].as_double() > 0) != (alt[i - 1].as_double() > 0);
    }
    CHECK(sign_changes == 1);
    CHECK(t.monitored_fields == testing::demo_fields());
  }

  TEST_CASE("takeoff calls before liftoff leave altitude unchanged") {
    auto t = testing::demo_trace(demo::Scenario::kTakeoff);
    std::size_t alt = *t.field_index("altitude");
    int effective = 0;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
      const auto& e = t.events[i];
      if (e.kind != EventKind::kExit || e.fn != "takeoff") continue;
      if (t.events[i - 1].vars[alt] != e.vars[alt]) ++effective;
    }
    CHECK(effective == 1);
  }

  TEST_CASE("gear changes exactly once, 0 -> 1") {
    for (auto s : {demo::Scenario::kTakeoffWithGear, demo::Scenario::kBuggyTakeoff,
                   demo::Scenario::kFullFlight}) {
      auto gear = column(testing::demo_trace(s), "gear");
      CHECK(gear.front() == Value(0));
      CHECK(gear.back() == Value(1));
      CHECK(changes(gear) == 1);
    }
  }

  TEST_CASE("buggy gear retracts below the safe altitude") {
    for (auto s : {demo::Scenario::kTakeoffWithGear, demo::Scenario::kBuggyTakeoff}) {
      auto t = testing::demo_trace(s);
      auto gear = column(t, "gear");
      auto alt = column(t, "altitude");
      for (std::size_t i = 1; i < gear.size(); ++i) {
        if (gear[i] != gear[i - 1]) {
          bool below = alt[i].as_double() < 100.0;
          CHECK(below == (s == demo::Scenario::kBuggyTakeoff));
        }
      }
    }
  }

  TEST_CASE("counters are monotone") {
    for (auto s : {demo::Scenario::kTakeoff, demo::Scenario::kTakeoffWithGear,
                   demo::Scenario::kFullFlight, demo::Scenario::kBuggyTakeoff}) {
      auto t = testing::demo_trace(s);
      auto speed = column(t, "speed");
      auto alt = column(t, "altitude");
      for (std::size_t i = 1; i < speed.size(); ++i) {
        CHECK(speed[i].as_double() >= speed[i - 1].as_double());
        CHECK(alt[i].as_double() >= alt[i - 1].as_double());
      }
    }
  }

  TEST_CASE("one tick is not enough to take off") {
    demo::FlightParams p;
    p.ticks = 1;
    auto alt = column(testing::demo_trace(demo::Scenario::kTakeoff, p), "altitude");
    for (const auto& a : alt) CHECK(a == Value(-1.0));
  }

  TEST_CASE("scenarios are deterministic") {
    auto a = serialize_trace(testing::demo_trace(demo::Scenario::kFullFlight));
    auto b = serialize_trace(testing::demo_trace(demo::Scenario::kFullFlight));
    CHECK(a == b);
  }

  TEST_CASE("parameters") {
    demo::FlightParams p;
    demo::apply_param(p, "takeOffSpeed=80");
    demo::apply_param(p, "ticks=3");
    CHECK(p.take_off_speed == 80);
    CHECK(p.ticks == 3);
    CHECK_THROWS_AS(demo::apply_param(p, "wings=2"), Error);
    CHECK_THROWS_AS(demo::apply_param(p, "ticks"), Error);
    p.ticks = 0;
    CHECK_THROWS_AS(demo::run_scenario({demo::Scenario::kTakeoff, p, 0}), Error);
    CHECK_THROWS_AS(demo::parse_scenario("landing"), Error);
    CHECK(demo::parse_scenario("full_flight") == demo::Scenario::kFullFlight);
  }
}

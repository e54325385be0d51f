#pragma once

// Fixtures and brute-force oracles shared by the unit and acceptance tests.

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tracelens/constraints.hpp"
#include "tracelens/flight_demo.hpp"
#include "tracelens/miners.hpp"
#include "tracelens/model.hpp"
#include "tracelens/trace.hpp"

namespace testing {

using namespace tracelens;

inline const std::vector<std::string>& demo_fields() {
  static const std::vector<std::string> f = {"gear",     "speed",     "takeOffSpeed",
                                             "altitude", "groundAlt", "safeAltForGearRetract"};
  return f;
}

inline ConcreteTrace demo_trace(demo::Scenario s, demo::FlightParams p = {}) {
  return demo::run_scenario({s, p, 0});
}

inline MonitorConfig onground_config() {
  MonitorConfig c;
  c.name = "onground";
  c.fields = {"altitude", "speed"};
  c.functions = {"accelerate", "takeoff"};
  c.constraints = {parse_constraint("cmp(altitude, 0)")};
  return c;
}

inline MonitorConfig gear_config(std::vector<std::string> functions = {"accelerate", "takeoff",
                                                                         "retractGear"}) {
  MonitorConfig c;
  c.name = "gear";
  c.fields = demo_fields();
  c.functions = std::move(functions);
  c.constraints = {parse_constraint("value_change(gear)"),
                   parse_constraint("cmp(speed, takeOffSpeed)"),
                   parse_constraint("range(altitude, groundAlt, safeAltForGearRetract)")};
  return c;
}

// Random well-nested trace over integer fields f0..f{n-1}. Values change at
// arbitrary boundaries, including between top-level calls.
inline ConcreteTrace random_nested_trace(std::mt19937_64& rng, int max_depth, int fields,
                                         int top_calls, const std::string& id = "rand") {
  ConcreteTrace t;
  t.id = id;
  for (int i = 0; i < fields; ++i) t.monitored_fields.push_back("f" + std::to_string(i));
  std::vector<std::int64_t> vars(static_cast<std::size_t>(fields), 0);
  std::int64_t seq = 1;
  std::uniform_int_distribution<int> coin(0, 99);
  static const char* kNames[] = {"alpha", "beta", "gamma", "delta", "eps"};

  auto mutate = [&] {
    for (auto& v : vars) {
      int r = coin(rng);
      if (r < 15) v += 1;
      else if (r < 20) v -= 1;  // may restore an earlier value
    }
  };
  auto snapshot = [&] {
    std::vector<Value> out;
    for (auto v : vars) out.emplace_back(v);
    return out;
  };
  std::function<void(int)> call = [&](int depth) {
    std::string fn = kNames[coin(rng) % 5];
    t.events.push_back({seq++, EventKind::kEnter, fn, depth, snapshot(), {}});
    mutate();
    int children = depth + 1 < max_depth ? coin(rng) % 4 : 0;
    for (int c = 0; c < children; ++c) {
      call(depth + 1);
      mutate();
    }
    t.events.push_back({seq++, EventKind::kExit, fn, depth, snapshot(), {}});
  };
  for (int i = 0; i < top_calls; ++i) {
    call(0);
    mutate();
  }
  return t;
}

// Walks the nesting stack for every consecutive-snapshot difference and
// picks the deepest bracketing span whose endpoints differ; otherwise the
// innermost bracketing span; otherwise no function.
inline std::vector<AttributionRecord> oracle_attribution(const ConcreteTrace& t,
                                                         const std::vector<std::string>& fields,
                                                         double eps) {
  const std::size_t n = t.events.size();
  std::vector<std::size_t> match(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (t.events[i].kind == EventKind::kEnter) {
      stack.push_back(i);
    } else {
      match[stack.back()] = i;
      stack.pop_back();
    }
  }
  std::vector<AttributionRecord> out;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (const auto& f : fields) {
      std::size_t idx = *t.field_index(f);
      if (!differs(t.events[i].vars[idx], t.events[i + 1].vars[idx], eps)) continue;
      std::vector<std::size_t> bracketing;  // enter indices, outermost first
      for (std::size_t e = 0; e <= i; ++e)
        if (t.events[e].kind == EventKind::kEnter && match[e] >= i + 1) bracketing.push_back(e);
      std::sort(bracketing.begin(), bracketing.end(), [&](std::size_t a, std::size_t b) {
        return t.events[a].depth > t.events[b].depth;
      });
      AttributionRecord rec{f, t.events[i + 1].seq, "", -1, -1};
      const std::size_t* pick = nullptr;
      for (const auto& e : bracketing) {
        if (differs(t.events[e].vars[idx], t.events[match[e]].vars[idx], eps)) {
          pick = &e;
          break;
        }
      }
      if (!pick && !bracketing.empty()) pick = &bracketing.front();
      if (pick) {
        rec.fn = t.events[*pick].fn;
        rec.depth = t.events[*pick].depth;
        rec.enter_seq = t.events[*pick].seq;
      }
      out.push_back(rec);
    }
  }
  return out;
}

inline void sort_records(std::vector<AttributionRecord>& r) {
  std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
    return std::tie(a.seq, a.field) < std::tie(b.seq, b.field);
  });
}

// Synthetic filtered trace with the given labels; every step changes x.
inline FilteredTrace label_trace(const LabelSequence& labels, const std::string& id = "lt") {
  FilteredTrace t;
  t.id = id;
  t.origin = id;
  t.fields = {"x"};
  t.initial = {Value(std::int64_t{0})};
  t.first_seq = 1;
  std::int64_t seq = 1;
  std::int64_t x = 0;
  for (const auto& l : labels) {
    FilteredStep s;
    s.fn = l;
    s.enter_seq = ++seq;
    s.exit_seq = ++seq;
    s.changed = {"x"};
    s.vars = {Value(++x)};
    t.steps.push_back(std::move(s));
  }
  t.last_seq = seq + 1;
  return t;
}

// Set of all label sequences (up to `limit` long) leaving state s.
inline std::set<LabelSequence> suffixes(const Fsm& fsm, std::size_t s, std::size_t limit) {
  std::set<LabelSequence> out{{}};
  if (limit == 0) return out;
  for (const auto& t : fsm.transitions) {
    if (t.from != s) continue;
    for (auto tail : suffixes(fsm, t.to, limit - 1)) {
      tail.insert(tail.begin(), t.label);
      out.insert(std::move(tail));
    }
  }
  return out;
}

}  // namespace testing

#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tracelens/error.hpp"

using namespace tracelens;

namespace {

Fsm pta(std::vector<LabelSequence> traces) { return build_pta(traces); }

}  // namespace

TEST_SUITE("miners") {
  TEST_CASE("PTA of shared prefixes") {
    Fsm p = pta({{"a", "b"}, {"a", "c"}});
    CHECK(p.state_count == 4);
    CHECK(p.transitions.size() == 3);
    CHECK(p.initial == 0);
    CHECK(p.transitions.count({0, 1, "a"}));
    CHECK(p.transitions.count({1, 2, "b"}));
    CHECK(p.transitions.count({1, 3, "c"}));
    CHECK(p.is_deterministic());
    CHECK(pta({}).state_count == 1);
    CHECK(pta({{}}).transitions.empty());
  }

  TEST_CASE("k = 0 collapses to one state with a self-loop per label") {
    for (bool det : {true, false}) {
      Fsm m = ktails(pta({{"a", "b"}, {"c"}, {"b", "b", "a"}}), 0, det);
      CHECK(m.state_count == 1);
      CHECK(m.transitions.size() == 3);
      for (const auto& t : m.transitions) CHECK((t.from == 0 && t.to == 0));
    }
  }

  TEST_CASE("k = 1 on {[a,b],[a,b,a,b]} loops between two states") {
    Fsm m = ktails(pta({{"a", "b"}, {"a", "b", "a", "b"}}), 1, false);
    // Leaves (empty 1-tail) form their own class next to the a- and b-states.
    CHECK(m.state_count == 3);
    CHECK(m.transitions.count({0, 1, "a"}));
    CHECK(m.transitions.count({1, 0, "b"}));
    CHECK(m.transitions.count({1, 2, "b"}));
    CHECK(accepts(m, {"a", "b", "a", "b", "a", "b"}));
    CHECK_FALSE(accepts(m, {"b"}));
  }

  TEST_CASE("large k keeps exactly the training language") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> len(0, 5), sym(0, 2);
    for (int round = 0; round < 20; ++round) {
      std::vector<LabelSequence> traces(4);
      std::size_t longest = 0;
      for (auto& t : traces) {
        int n = len(rng);
        for (int i = 0; i < n; ++i) t.push_back(std::string(1, static_cast<char>('a' + sym(rng))));
        longest = std::max(longest, t.size());
      }
      Fsm p = pta(traces);
      Fsm m = ktails(p, static_cast<int>(longest) + 1, true);
      CHECK(testing::suffixes(m, m.initial, longest + 2) ==
            testing::suffixes(p, p.initial, longest + 2));
    }
  }

  TEST_CASE("careful determinisation yields a DFA") {
    Fsm m = ktails(pta({{"a", "b", "c"}, {"a", "c", "b"}, {"b", "a"}}), 1, true);
    CHECK(m.is_deterministic());
  }

  TEST_CASE("red-blue") {
    CHECK(redblue(pta({{"a", "a", "a"}})).state_count == 1);
    Fsm two = redblue(pta({{"a"}, {"b"}}));
    CHECK(two.state_count == 3);
    Fsm m = redblue(pta({{"a", "b"}, {"a", "b", "a", "b"}}));
    CHECK(accepts(m, {"a", "b", "a", "b"}));
    CHECK(m.is_deterministic());
  }

  TEST_CASE("gktail labels carry changed fields") {
    CHECK(signature_label("takeoff", {}) == "takeoff");
    CHECK(signature_label("takeoff", {"altitude", "speed"}) == "takeoff[altitude,speed]");
    auto c = testing::onground_config();
    auto f = filter_trace(testing::demo_trace(demo::Scenario::kTakeoff), c);
    auto seqs = signature_sequences({f});
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0].back() == "takeoff[altitude]");
    Fsm g = gktail_lite({f}, 1, true);
    auto alpha = g.alphabet();
    CHECK(alpha.count("takeoff[altitude]"));
    CHECK(alpha.count("takeoff[speed]"));
    CHECK(alpha.count("accelerate[speed]"));
  }

  TEST_CASE("canonical form relabels breadth-first") {
    Fsm f;
    f.state_count = 3;
    f.initial = 2;
    f.transitions = {{2, 0, "b"}, {2, 1, "a"}};
    Fsm c = canonicalize(f);
    CHECK(c.initial == 0);
    CHECK(c.transitions.count({0, 1, "a"}));
    CHECK(c.transitions.count({0, 2, "b"}));
  }

  TEST_CASE("budgets are reported, not thrown") {
    std::vector<FilteredTrace> traces;
    LabelSequence labels;
    for (int i = 0; i < 20000; ++i) labels.push_back(i % 3 ? "a" : "b");
    traces.push_back(testing::label_trace(labels));
    MinerParams p;
    p.k = 2;
    p.memory_budget = 1024;
    MineResult r = mine(traces, p);
    CHECK(r.outcome == MineOutcome::kOom);
    CHECK_FALSE(r.model);
    p.memory_budget = std::size_t{1} << 30;
    p.timeout = std::chrono::milliseconds(0);
    r = mine(traces, p);
    CHECK(r.outcome == MineOutcome::kTimeout);
    p.timeout = std::chrono::minutes(1);
    r = mine(traces, p);
    CHECK(r.outcome == MineOutcome::kOk);
    REQUIRE(r.model);
    CHECK(accepts(*r.model, labels));
  }

  TEST_CASE("sweep covers the grid") {
    std::vector<FilteredTrace> traces{testing::label_trace({"a", "b", "a", "b"})};
    SweepGrid g;
    g.workers = 2;
    auto rows = mine_sweep(traces, g);
    CHECK(rows.size() >= 13);
    for (const auto& r : rows) CHECK(r.result.outcome == MineOutcome::kOk);
    CHECK_FALSE(format_sweep(rows).empty());
  }

  TEST_CASE("duration and size parsing") {
    CHECK(parse_duration("2s") == std::chrono::milliseconds(2000));
    CHECK(parse_duration("20m") == std::chrono::minutes(20));
    CHECK(parse_duration("150ms") == std::chrono::milliseconds(150));
    CHECK(parse_bytes("64MiB") == 64u << 20);
    CHECK(parse_bytes("1GiB") == std::size_t{1} << 30);
    CHECK_THROWS_AS(parse_duration("soon"), Error);
    CHECK_THROWS_AS(parse_bytes("-3"), Error);
    CHECK(parse_strategy("redblue") == Strategy::kRedBlue);
    CHECK_THROWS_AS(parse_strategy("lstar"), Error);
  }
}

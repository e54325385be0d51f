#include "doctest.h"
#include "support.hpp"
#include "tracelens/abstractor.hpp"
#include "tracelens/error.hpp"
#include "tracelens/metrics.hpp"

using namespace tracelens;

namespace {

Efsm chain(int n) {
  Fsm f;
  f.state_count = static_cast<std::size_t>(n);
  for (int i = 0; i + 1 < n; ++i)
    f.transitions.insert({static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1), "go"});
  return to_efsm(f, {{"kind", "fsm"}});
}

Efsm demo_model(demo::Scenario s, const MonitorConfig& c) {
  return build_model({filter_trace(testing::demo_trace(s), c)}, c);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("stats") {
    Efsm m = demo_model(demo::Scenario::kTakeoff, testing::onground_config());
    CHECK(model_stats(m) == ModelStats{2, 3, 1, 0});
    Fsm f = to_fsm(m);
    CHECK(model_stats(f).states == 2);
    CHECK(model_stats(f).transitions == 3);
  }

  TEST_CASE("exam on a chain is the distance plus one") {
    Efsm m = chain(6);
    for (int i = 0; i < 6; ++i)
      CHECK(exam_score(m, m.states[static_cast<std::size_t>(i)].id) == static_cast<std::size_t>(i + 1));
  }

  TEST_CASE("exam: initial state scores 1, liftoff target scores 2") {
    Efsm m = demo_model(demo::Scenario::kTakeoff, testing::onground_config());
    CHECK(exam_score(m, "s0") == 1);
    CHECK(exam_score(m, "s1") == 2);
    CHECK(exam_score(m, "s1", ExamOrder::kStateId) == 2);
  }

  TEST_CASE("exam errors") {
    Efsm m = chain(3);
    m.transitions.clear();
    CHECK(code_of([&] { exam_score(m, "s2"); }) == ErrorCode::kExamUnreachable);
    CHECK(code_of([&] { exam_score(m, "nope"); }) == ErrorCode::kExamUnknownState);
  }

  TEST_CASE("diff: identity, antisymmetry, disjointness") {
    auto c = testing::gear_config();
    Efsm good = demo_model(demo::Scenario::kTakeoffWithGear, c);
    Efsm bad = demo_model(demo::Scenario::kBuggyTakeoff, c);
    CHECK(diff_models(good, good).empty());
    ModelDiff ab = diff_models(good, bad);
    ModelDiff ba = diff_models(bad, good);
    CHECK(ab.transitions_only_a == ba.transitions_only_b);
    CHECK(ab.transitions_only_b == ba.transitions_only_a);
    CHECK(ab.states_only_a == ba.states_only_b);
    for (const auto& t : ab.transitions_only_a)
      CHECK(std::find(ab.transitions_only_b.begin(), ab.transitions_only_b.end(), t) ==
            ab.transitions_only_b.end());
    CHECK_FALSE(ab.transitions_only_b.empty());
    CHECK_FALSE(format_diff_text(ab, good).empty());
    CHECK(diff_to_json(ab).contains("transitions_only_b"));
  }

  TEST_CASE("diff of models under different constraints fails") {
    Efsm a = demo_model(demo::Scenario::kTakeoff, testing::onground_config());
    Efsm b = demo_model(demo::Scenario::kTakeoff, testing::gear_config());
    CHECK(code_of([&] { diff_models(a, b); }) == ErrorCode::kDiffConfigMismatch);
  }
}

#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "tracelens/model.hpp"

namespace tracelens {

struct ModelStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
  std::size_t initial = 0;
  std::size_t warnings = 0;

  friend bool operator==(const ModelStats&, const ModelStats&) = default;
};

ModelStats model_stats(const Efsm& model);
ModelStats model_stats(const Fsm& fsm);

enum class ExamOrder {
  // Successors by transition label, then target valuation, then id.
  kLabelLexicographic,
  // Successors by target state id only.
  kStateId,
};

// 1-based position of `faulty` in a breadth-first examination starting from
// the initial states.
std::size_t exam_score(const Efsm& model, const std::string& faulty,
                       ExamOrder order = ExamOrder::kLabelLexicographic);

struct TransitionKey {
  Valuation from;
  std::string label;
  Valuation to;

  friend auto operator<=>(const TransitionKey&, const TransitionKey&) = default;
  friend bool operator==(const TransitionKey&, const TransitionKey&) = default;
};

struct ModelDiff {
  std::vector<Valuation> states_only_a;
  std::vector<Valuation> states_only_b;
  std::vector<Valuation> states_shared;
  std::vector<TransitionKey> transitions_only_a;
  std::vector<TransitionKey> transitions_only_b;

  bool empty() const {
    return states_only_a.empty() && states_only_b.empty() &&
           transitions_only_a.empty() && transitions_only_b.empty();
  }
};

ModelDiff diff_models(const Efsm& a, const Efsm& b);
std::string format_diff_text(const ModelDiff& diff, const Efsm& a);
nlohmann::ordered_json diff_to_json(const ModelDiff& diff);

}  // namespace tracelens

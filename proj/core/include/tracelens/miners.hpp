#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracelens/model.hpp"
#include "tracelens/trace.hpp"

namespace tracelens {

using LabelSequence = std::vector<std::string>;

enum class Strategy { kKTails, kRedBlue, kGkTailLite };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct MinerParams {
  Strategy strategy = Strategy::kKTails;
  int k = 2;
  bool careful_det = false;
  std::chrono::milliseconds timeout{std::chrono::minutes(20)};
  std::size_t memory_budget = std::size_t{1} << 30;
};

// Wall-clock and approximate-memory budget for one mining run. Throws
// MINE_TIMEOUT / MINE_OOM from poll() and charge().
class Budget {
 public:
  Budget(std::chrono::milliseconds timeout, std::size_t memory_bytes);
  static Budget unlimited();

  void poll() {
    if (++ops_ % 256 == 0) check_clock();
  }
  void charge(std::size_t bytes);
  void release(std::size_t bytes) { used_ -= std::min(used_, bytes); }
  void check_clock() const;
  std::size_t used() const { return used_; }

 private:
  std::chrono::steady_clock::time_point deadline_;
  bool timed_ = true;
  std::size_t limit_;
  std::size_t used_ = 0;
  std::size_t ops_ = 0;
};

// Tree-shaped acceptor for the prefix closure of `traces`. State ids follow
// breadth-first order with children visited in label order.
Fsm build_pta(const std::vector<LabelSequence>& traces, Budget* budget = nullptr);

// Merges states with equal k-tails (sets of outgoing label sequences of
// length <= k, shorter paths counting as complete). With `careful_det` the
// quotient is made deterministic by subset construction, which keeps the
// merged language instead of generalising it further.
Fsm ktails(const Fsm& pta, int k, bool careful_det, Budget* budget = nullptr);

// Blue-fringe state merging with evidence scores (positive traces only).
// A merge is taken only when it overlaps at least one transition; ties go
// to the smallest (blue, red) ids.
Fsm redblue(const Fsm& pta, Budget* budget = nullptr);

// kTails over labels enriched with each call's changed-field set, e.g.
// "takeoff[altitude]". Calls that changed nothing keep the bare name.
std::vector<LabelSequence> signature_sequences(
    const std::vector<FilteredTrace>& traces);
std::string signature_label(const std::string& fn,
                            const std::vector<std::string>& changed);
Fsm gktail_lite(const std::vector<FilteredTrace>& traces, int k,
                bool careful_det, Budget* budget = nullptr);

// Prefix-closed acceptance; subset simulation for nondeterministic input.
bool accepts(const Fsm& fsm, const LabelSequence& sequence);

// Step labels of a filtered trace.
LabelSequence step_labels(const FilteredTrace& trace);

// Relabels states by breadth-first order from the initial state (labels in
// lexicographic order) and drops unreachable states.
Fsm canonicalize(const Fsm& fsm);

enum class MineOutcome { kOk, kTimeout, kOom };
std::string_view to_string(MineOutcome outcome);

struct MineResult {
  MineOutcome outcome = MineOutcome::kOk;
  std::optional<Fsm> model;
  std::chrono::milliseconds wall{0};
  std::string message;
};

// Runs one strategy under its budget. Budget failures are reported in the
// result, never thrown.
MineResult mine(const std::vector<FilteredTrace>& traces,
                const MinerParams& params);

nlohmann::ordered_json mine_meta(const MinerParams& params,
                                 const std::vector<FilteredTrace>& traces);

struct SweepRow {
  MinerParams params;
  MineResult result;
};

struct SweepGrid {
  std::vector<Strategy> strategies{Strategy::kKTails, Strategy::kRedBlue,
                                   Strategy::kGkTailLite};
  std::vector<int> ks{0, 1, 2};
  std::vector<bool> careful_det{true, false};
  std::chrono::milliseconds timeout{std::chrono::minutes(20)};
  std::size_t memory_budget = std::size_t{1} << 30;
  unsigned workers = 0;  // 0: hardware concurrency
};

std::vector<SweepRow> mine_sweep(const std::vector<FilteredTrace>& traces,
                                 const SweepGrid& grid);
std::string format_sweep(const std::vector<SweepRow>& rows);

std::chrono::milliseconds parse_duration(std::string_view text);
std::size_t parse_bytes(std::string_view text);

}  // namespace tracelens

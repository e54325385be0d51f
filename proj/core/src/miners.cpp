#include "tracelens/miners.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "tracelens/error.hpp"

namespace tracelens {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kKTails: return "ktails";
    case Strategy::kRedBlue: return "redblue";
    case Strategy::kGkTailLite: return "gktail_lite";
  }
  return "ktails";
}

Strategy parse_strategy(std::string_view text) {
  for (auto s : {Strategy::kKTails, Strategy::kRedBlue, Strategy::kGkTailLite})
    if (to_string(s) == text) return s;
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(text) + "'");
}

std::string_view to_string(MineOutcome outcome) {
  switch (outcome) {
    case MineOutcome::kOk: return "ok";
    case MineOutcome::kTimeout: return "timeout";
    case MineOutcome::kOom: return "oom";
  }
  return "ok";
}

// ---------------------------------------------------------------------------
// Budget

Budget::Budget(std::chrono::milliseconds timeout, std::size_t memory_bytes)
    : deadline_(Clock::now() + timeout), limit_(memory_bytes) {}

Budget Budget::unlimited() {
  Budget b(std::chrono::milliseconds(0), std::numeric_limits<std::size_t>::max());
  b.timed_ = false;
  return b;
}

void Budget::charge(std::size_t bytes) {
  used_ += bytes;
  if (used_ > limit_)
    throw Error(ErrorCode::kMineOom, "memory budget of " + std::to_string(limit_) +
                                         " bytes exceeded");
}

void Budget::check_clock() const {
  if (timed_ && Clock::now() > deadline_)
    throw Error(ErrorCode::kMineTimeout, "time budget exceeded");
}

namespace {

Budget& no_budget() {
  thread_local Budget b = Budget::unlimited();
  return b;
}

// Adjacency view with interned labels; label ids follow lexicographic order.
struct Graph {
  std::vector<std::string> labels;
  std::vector<std::vector<std::pair<int, std::size_t>>> out;  // sorted
  std::size_t initial = 0;

  static Graph from(const Fsm& fsm) {
    Graph g;
    auto alpha = fsm.alphabet();
    g.labels.assign(alpha.begin(), alpha.end());
    std::map<std::string, int> id;
    for (std::size_t i = 0; i < g.labels.size(); ++i) id[g.labels[i]] = static_cast<int>(i);
    g.out.resize(fsm.state_count);
    for (const auto& t : fsm.transitions) g.out[t.from].emplace_back(id[t.label], t.to);
    for (auto& o : g.out) std::sort(o.begin(), o.end());
    g.initial = fsm.initial;
    return g;
  }
};

constexpr std::size_t kStateCost = 64;
constexpr std::size_t kEdgeCost = 48;

}  // namespace

// ---------------------------------------------------------------------------
// PTA

Fsm build_pta(const std::vector<LabelSequence>& traces, Budget* budget) {
  Budget& b = budget ? *budget : no_budget();
  // Trie first, then renumber breadth-first with children in label order.
  std::vector<std::map<std::string, std::size_t>> trie(1);
  b.charge(kStateCost);
  for (const auto& t : traces) {
    std::size_t cur = 0;
    for (const auto& label : t) {
      b.poll();
      auto it = trie[cur].find(label);
      if (it == trie[cur].end()) {
        b.charge(kStateCost + kEdgeCost + label.size());
        trie.emplace_back();
        it = trie[cur].emplace(label, trie.size() - 1).first;
      }
      cur = it->second;
    }
  }
  std::vector<std::size_t> bfs_id(trie.size());
  std::deque<std::size_t> queue{0};
  std::size_t next = 0;
  bfs_id[0] = next++;
  Fsm fsm;
  fsm.state_count = trie.size();
  while (!queue.empty()) {
    std::size_t s = queue.front();
    queue.pop_front();
    for (const auto& [label, child] : trie[s]) {
      bfs_id[child] = next++;
      fsm.transitions.insert({bfs_id[s], bfs_id[child], label});
      queue.push_back(child);
    }
  }
  return fsm;
}

// ---------------------------------------------------------------------------
// kTails

namespace {

Fsm determinize(const Fsm& nfa, Budget& b) {
  Graph g = Graph::from(nfa);
  std::map<std::vector<std::size_t>, std::size_t> index;
  std::vector<std::vector<std::size_t>> subsets;
  std::deque<std::size_t> queue;
  auto intern = [&](std::vector<std::size_t> subset) {
    auto [it, fresh] = index.emplace(subset, subsets.size());
    if (fresh) {
      b.charge(kStateCost + subset.size() * sizeof(std::size_t) * 2);
      subsets.push_back(std::move(subset));
      queue.push_back(subsets.size() - 1);
    }
    return it->second;
  };
  Fsm out;
  intern({g.initial});
  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    std::map<int, std::vector<std::size_t>> moves;
    for (std::size_t s : subsets[cur]) {
      for (const auto& [label, to] : g.out[s]) {
        b.poll();
        moves[label].push_back(to);
      }
    }
    for (auto& [label, targets] : moves) {
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      std::size_t to = intern(std::move(targets));
      out.transitions.insert({cur, to, g.labels[label]});
      b.charge(kEdgeCost);
    }
  }
  out.state_count = subsets.size();
  out.initial = 0;
  return out;
}

}  // namespace

Fsm ktails(const Fsm& pta, int k, bool careful_det, Budget* budget) {
  Budget& b = budget ? *budget : no_budget();
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "k must be non-negative");
  Graph g = Graph::from(pta);
  const std::size_t n = g.out.size();
  if (n == 0) return pta;
  b.charge(n * sizeof(std::size_t) * 2);

  // class_j(s) is determined by the labelled classes_{j-1} of s's successors.
  std::vector<std::size_t> cls(n, 0);
  std::size_t class_count = 1;
  for (int j = 1; j <= k; ++j) {
    std::map<std::vector<std::pair<int, std::size_t>>, std::size_t> ids;
    std::vector<std::size_t> next(n);
    for (std::size_t s = 0; s < n; ++s) {
      b.poll();
      std::vector<std::pair<int, std::size_t>> sig;
      sig.reserve(g.out[s].size());
      for (const auto& [label, to] : g.out[s]) sig.emplace_back(label, cls[to]);
      std::sort(sig.begin(), sig.end());
      sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
      auto [it, fresh] = ids.emplace(std::move(sig), ids.size());
      if (fresh) b.charge(kStateCost + g.out[s].size() * 16);
      next[s] = it->second;
    }
    std::size_t count = ids.size();
    cls = std::move(next);
    if (count == class_count) break;  // partition is stable
    class_count = count;
  }
  // Classes renumbered by first occurrence so the quotient is deterministic.
  std::vector<std::size_t> renum(n, static_cast<std::size_t>(-1));
  std::size_t next_id = 0;
  for (std::size_t s = 0; s < n; ++s)
    if (renum[cls[s]] == static_cast<std::size_t>(-1)) renum[cls[s]] = next_id++;

  Fsm quotient;
  quotient.state_count = next_id;
  quotient.initial = renum[cls[g.initial]];
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& [label, to] : g.out[s]) {
      b.poll();
      if (quotient.transitions.insert({renum[cls[s]], renum[cls[to]], g.labels[label]}).second)
        b.charge(kEdgeCost);
    }
  }
  if (careful_det && !quotient.is_deterministic()) return canonicalize(determinize(quotient, b));
  return canonicalize(quotient);
}

// ---------------------------------------------------------------------------
// Red-blue

namespace {

class BlueFringe {
 public:
  BlueFringe(const Fsm& pta, Budget& b) : b_(b) {
    Graph g = Graph::from(pta);
    labels_ = g.labels;
    delta_.resize(g.out.size());
    parent_.assign(g.out.size(), kNone);
    plabel_.assign(g.out.size(), -1);
    for (std::size_t s = 0; s < g.out.size(); ++s) {
      for (const auto& [label, to] : g.out[s]) {
        delta_[s].emplace(label, to);
        parent_[to] = s;
        plabel_[to] = label;
      }
    }
    initial_ = g.initial;
    b_.charge(g.out.size() * (kStateCost + kEdgeCost));
  }

  Fsm run() {
    std::vector<std::size_t> red{initial_};
    std::vector<bool> is_red(delta_.size(), false);
    is_red[initial_] = true;
    while (true) {
      auto blue = fringe(red, is_red);
      if (blue.empty()) break;
      // Promote the first blue state that no red state can absorb with
      // positive evidence; otherwise take the best-scoring merge.
      bool promoted = false;
      long best = 0;
      std::size_t best_red = kNone, best_blue = kNone;
      for (std::size_t q : blue) {
        long q_best = 0;
        std::size_t q_red = kNone;
        for (std::size_t r : red) {
          long score = try_merge(r, q, false);
          if (score > q_best) {
            q_best = score;
            q_red = r;
          }
        }
        if (q_red == kNone) {
          red.push_back(q);
          std::sort(red.begin(), red.end());
          is_red[q] = true;
          promoted = true;
          break;
        }
        if (q_best > best) {
          best = q_best;
          best_red = q_red;
          best_blue = q;
        }
      }
      if (promoted) continue;
      try_merge(best_red, best_blue, true);
    }
    Fsm out;
    out.state_count = delta_.size();
    out.initial = initial_;
    for (std::size_t s : red)
      for (const auto& [label, to] : delta_[s]) out.transitions.insert({s, to, labels_[label]});
    return canonicalize(out);
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::vector<std::size_t> fringe(const std::vector<std::size_t>& red,
                                  const std::vector<bool>& is_red) const {
    std::vector<std::size_t> blue;
    for (std::size_t r : red)
      for (const auto& [label, to] : delta_[r])
        if (!is_red[to]) blue.push_back(to);
    std::sort(blue.begin(), blue.end());
    blue.erase(std::unique(blue.begin(), blue.end()), blue.end());
    return blue;
  }

  // Folds the tree rooted at blue state q into red state r. Returns the
  // number of overlapping transitions; applies the result when `commit`.
  long try_merge(std::size_t r, std::size_t q, bool commit) {
    std::unordered_map<std::size_t, std::map<int, std::size_t>> overlay;
    auto edges = [&](std::size_t s) -> std::map<int, std::size_t>& {
      auto it = overlay.find(s);
      if (it != overlay.end()) return it->second;
      b_.charge(kStateCost + delta_[s].size() * kEdgeCost);
      return overlay.emplace(s, delta_[s]).first->second;
    };
    std::size_t charged = 0;
    long score = 0;
    std::vector<std::tuple<std::size_t, std::size_t, int>> moved;  // child, new parent, label
    edges(parent_[q])[plabel_[q]] = r;
    std::vector<std::pair<std::size_t, std::size_t>> work{{r, q}};
    while (!work.empty()) {
      auto [into, from] = work.back();
      work.pop_back();
      b_.poll();
      for (const auto& [label, child] : delta_[from]) {
        auto& dst = edges(into);
        auto it = dst.find(label);
        if (it == dst.end()) {
          dst.emplace(label, child);
          moved.emplace_back(child, into, label);
        } else {
          ++score;
          work.emplace_back(it->second, child);
        }
      }
    }
    for (const auto& [s, e] : overlay) charged += kStateCost + e.size() * kEdgeCost;
    if (commit) {
      for (auto& [s, e] : overlay) delta_[s] = std::move(e);
      for (const auto& [child, p, label] : moved) {
        parent_[child] = p;
        plabel_[child] = label;
      }
    }
    b_.release(charged);
    return score;
  }

  Budget& b_;
  std::vector<std::string> labels_;
  std::vector<std::map<int, std::size_t>> delta_;
  std::vector<std::size_t> parent_;
  std::vector<int> plabel_;
  std::size_t initial_ = 0;
};

}  // namespace

Fsm redblue(const Fsm& pta, Budget* budget) {
  Budget& b = budget ? *budget : no_budget();
  if (pta.state_count == 0) return pta;
  return BlueFringe(pta, b).run();
}

// ---------------------------------------------------------------------------
// gkTail-lite

std::string signature_label(const std::string& fn, const std::vector<std::string>& changed) {
  if (changed.empty()) return fn;
  std::vector<std::string> sorted = changed;
  std::sort(sorted.begin(), sorted.end());
  std::string out = fn + "[";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) out += ",";
    out += sorted[i];
  }
  return out + "]";
}

std::vector<LabelSequence> signature_sequences(const std::vector<FilteredTrace>& traces) {
  std::vector<LabelSequence> out;
  for (const auto& t : traces) {
    std::vector<const FilteredStep*> calls;
    for (const auto& s : t.steps) calls.push_back(&s);
    for (const auto& s : t.inert) calls.push_back(&s);
    std::sort(calls.begin(), calls.end(), [](const FilteredStep* a, const FilteredStep* b) {
      return a->exit_seq < b->exit_seq;
    });
    LabelSequence seq;
    for (const auto* c : calls) seq.push_back(signature_label(c->fn, c->changed));
    out.push_back(std::move(seq));
  }
  return out;
}

Fsm gktail_lite(const std::vector<FilteredTrace>& traces, int k, bool careful_det,
                Budget* budget) {
  return ktails(build_pta(signature_sequences(traces), budget), k, careful_det, budget);
}

// ---------------------------------------------------------------------------
// Utilities

bool accepts(const Fsm& fsm, const LabelSequence& sequence) {
  if (sequence.empty()) return true;
  if (fsm.state_count == 0) return false;
  std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>> delta;
  for (const auto& t : fsm.transitions) delta[{t.from, t.label}].push_back(t.to);
  std::set<std::size_t> current{fsm.initial};
  for (const auto& label : sequence) {
    std::set<std::size_t> next;
    for (std::size_t s : current) {
      auto it = delta.find({s, label});
      if (it != delta.end()) next.insert(it->second.begin(), it->second.end());
    }
    if (next.empty()) return false;
    current = std::move(next);
  }
  return true;
}

LabelSequence step_labels(const FilteredTrace& trace) {
  LabelSequence out;
  out.reserve(trace.steps.size());
  for (const auto& s : trace.steps) out.push_back(s.fn);
  return out;
}

Fsm canonicalize(const Fsm& fsm) {
  if (fsm.state_count == 0) return fsm;
  std::vector<std::vector<std::pair<std::string, std::size_t>>> out(fsm.state_count);
  for (const auto& t : fsm.transitions) out[t.from].emplace_back(t.label, t.to);
  for (auto& o : out) std::sort(o.begin(), o.end());
  std::vector<std::size_t> id(fsm.state_count, static_cast<std::size_t>(-1));
  std::deque<std::size_t> queue{fsm.initial};
  std::size_t next = 0;
  id[fsm.initial] = next++;
  while (!queue.empty()) {
    std::size_t s = queue.front();
    queue.pop_front();
    for (const auto& [label, to] : out[s]) {
      if (id[to] == static_cast<std::size_t>(-1)) {
        id[to] = next++;
        queue.push_back(to);
      }
    }
  }
  Fsm result;
  result.state_count = next;
  result.initial = 0;
  for (const auto& t : fsm.transitions)
    if (id[t.from] != static_cast<std::size_t>(-1))
      result.transitions.insert({id[t.from], id[t.to], t.label});
  if (fsm.accepting) {
    std::set<std::size_t> acc;
    for (auto a : *fsm.accepting)
      if (id[a] != static_cast<std::size_t>(-1)) acc.insert(id[a]);
    result.accepting = acc;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Runs

MineResult mine(const std::vector<FilteredTrace>& traces, const MinerParams& params) {
  MineResult result;
  auto start = Clock::now();
  Budget budget(params.timeout, params.memory_budget);
  try {
    switch (params.strategy) {
      case Strategy::kKTails: {
        std::vector<LabelSequence> seqs;
        for (const auto& t : traces) seqs.push_back(step_labels(t));
        result.model = ktails(build_pta(seqs, &budget), params.k, params.careful_det, &budget);
        break;
      }
      case Strategy::kRedBlue: {
        std::vector<LabelSequence> seqs;
        for (const auto& t : traces) seqs.push_back(step_labels(t));
        Fsm m = redblue(build_pta(seqs, &budget), &budget);
        if (params.careful_det && !m.is_deterministic()) m = canonicalize(determinize(m, budget));
        result.model = std::move(m);
        break;
      }
      case Strategy::kGkTailLite:
        result.model = gktail_lite(traces, params.k, params.careful_det, &budget);
        break;
    }
    budget.check_clock();
  } catch (const Error& e) {
    result.model.reset();
    result.message = e.what();
    if (e.code() == ErrorCode::kMineTimeout) result.outcome = MineOutcome::kTimeout;
    else if (e.code() == ErrorCode::kMineOom) result.outcome = MineOutcome::kOom;
    else throw;
  } catch (const std::bad_alloc&) {
    result.model.reset();
    result.outcome = MineOutcome::kOom;
    result.message = "allocation failed";
  }
  result.wall = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
  return result;
}

nlohmann::ordered_json mine_meta(const MinerParams& params,
                                 const std::vector<FilteredTrace>& traces) {
  ojson meta;
  meta["kind"] = "fsm";
  meta["strategy"] = to_string(params.strategy);
  meta["k"] = params.k;
  meta["careful_det"] = params.careful_det;
  std::set<std::string> ids;
  for (const auto& t : traces) ids.insert(t.origin.empty() ? t.id : t.origin);
  meta["traces"] = ids;
  return meta;
}

std::vector<SweepRow> mine_sweep(const std::vector<FilteredTrace>& traces,
                                 const SweepGrid& grid) {
  std::vector<SweepRow> rows;
  for (auto s : grid.strategies) {
    for (int k : grid.ks) {
      // k is irrelevant to red-blue; one row per det setting is enough.
      if (s == Strategy::kRedBlue && k != grid.ks.front()) continue;
      for (bool det : grid.careful_det) {
        MinerParams p;
        p.strategy = s;
        p.k = k;
        p.careful_det = det;
        p.timeout = grid.timeout;
        p.memory_budget = grid.memory_budget;
        rows.push_back({p, {}});
      }
    }
  }
  unsigned workers = grid.workers ? grid.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(rows.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](unsigned w) {
    try {
      for (std::size_t i = next++; i < rows.size(); i = next++)
        rows[i].result = mine(traces, rows[i].params);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

std::string format_sweep(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "strategy     k  det  outcome  states  transitions  wall_ms\n";
  for (const auto& r : rows) {
    char line[160];
    std::string states = r.result.model ? std::to_string(r.result.model->state_count) : "-";
    std::string trans = r.result.model ? std::to_string(r.result.model->transitions.size()) : "-";
    std::string k = r.params.strategy == Strategy::kRedBlue ? "-" : std::to_string(r.params.k);
    std::snprintf(line, sizeof(line), "%-12s %-2s %-4s %-8s %-7s %-12s %lld\n",
                  std::string(to_string(r.params.strategy)).c_str(), k.c_str(),
                  r.params.careful_det ? "on" : "off",
                  std::string(to_string(r.result.outcome)).c_str(), states.c_str(),
                  trans.c_str(), static_cast<long long>(r.result.wall.count()));
    out << line;
  }
  return out.str();
}

namespace {

std::pair<double, std::string_view> split_number(std::string_view text, const char* what) {
  std::size_t i = 0;
  while (i < text.size() && (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.'))
    ++i;
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + i, v);
  if (i == 0 || ec != std::errc() || ptr != text.data() + i || v < 0)
    throw Error(ErrorCode::kInvalidArgument, std::string("bad ") + what + " '" + std::string(text) + "'");
  return {v, text.substr(i)};
}

}  // namespace

std::chrono::milliseconds parse_duration(std::string_view text) {
  auto [v, unit] = split_number(text, "duration");
  double ms = 0;
  if (unit == "ms") ms = v;
  else if (unit == "s" || unit.empty()) ms = v * 1000;
  else if (unit == "m" || unit == "min") ms = v * 60'000;
  else if (unit == "h") ms = v * 3'600'000;
  else throw Error(ErrorCode::kInvalidArgument, "bad duration unit in '" + std::string(text) + "'");
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(ms)));
}

std::size_t parse_bytes(std::string_view text) {
  auto [v, unit] = split_number(text, "byte count");
  double mult = 0;
  if (unit.empty() || unit == "B") mult = 1;
  else if (unit == "KiB" || unit == "K") mult = 1024.0;
  else if (unit == "MiB" || unit == "M") mult = 1024.0 * 1024;
  else if (unit == "GiB" || unit == "G") mult = 1024.0 * 1024 * 1024;
  else if (unit == "KB") mult = 1e3;
  else if (unit == "MB") mult = 1e6;
  else if (unit == "GB") mult = 1e9;
  else throw Error(ErrorCode::kInvalidArgument, "bad byte unit in '" + std::string(text) + "'");
  return static_cast<std::size_t>(v * mult);
}

}  // namespace tracelens

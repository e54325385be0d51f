#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "tracelens/constraints.hpp"
#include "tracelens/model.hpp"
#include "tracelens/trace.hpp"

namespace tracelens {

struct AbstractOptions {
  // Emit a model warning for each selected-field change that a
  // non-selected function (or untraced code) is responsible for.
  bool warn_unexplained = false;
};

// Meta block stamped on every abstracted model; also the reference used to
// detect config mismatches on append.
nlohmann::ordered_json abstraction_meta(const MonitorConfig& config,
                                        const AbstractOptions& options);

// Folds one filtered trace into a copy of `model`. An empty model (no meta
// constraints) adopts the config.
Efsm abstract_append(const Efsm& model, const FilteredTrace& trace,
                     const MonitorConfig& config,
                     const AbstractOptions& options = {});

Efsm build_model(const std::vector<FilteredTrace>& traces,
                 const MonitorConfig& config,
                 const AbstractOptions& options = {});

// Incremental builder behind abstract_append; also usable directly with a
// TraceFilter for single-pass processing of large traces.
class ModelBuilder {
 public:
  ModelBuilder(const MonitorConfig& config, const AbstractOptions& options);
  ModelBuilder(Efsm seed, const MonitorConfig& config,
               const AbstractOptions& options);

  void begin_trace(const std::string& trace_id,
                   const std::vector<std::string>& fields,
                   const std::vector<Value>& initial, std::int64_t first_seq);
  void step(const FilteredStep& step);
  void unexplained(const UnexplainedChange& change);
  void end_trace(std::int64_t last_seq);

  Efsm finish() &&;
  std::size_t state_count() const { return states_.size(); }

 private:
  std::size_t state_for(const Valuation& valuation);
  void close_segment(std::int64_t end);

  MonitorConfig config_;
  AbstractOptions options_;
  nlohmann::ordered_json meta_;
  std::optional<Evaluator> evaluator_;
  std::vector<EfsmState> states_;
  std::map<Valuation, std::size_t> by_valuation_;
  std::set<std::tuple<std::size_t, std::string, std::size_t>> transitions_;
  std::set<std::string> warnings_;
  std::set<std::string> traces_;

  std::string trace_id_;
  std::optional<std::size_t> current_;
  std::int64_t segment_start_ = 0;
};

// Concrete view of one abstract state.
struct ZoomNode {
  std::int64_t seq = 0;
  EventKind kind = EventKind::kEnter;
  std::string fn;
  int depth = 0;
  FieldMap vars;
};

struct ZoomPath {
  std::string trace;
  std::vector<ZoomNode> nodes;  // consecutive snapshots
  // Edge i joins nodes[i] -> nodes[i+1] and carries nodes[i+1].fn.
  std::vector<std::string> edge_labels;
};

struct ZoomResult {
  std::string state;
  std::vector<ZoomPath> paths;  // one per residency segment, by start seq

  std::size_t node_count() const;
  std::size_t edge_count() const;
};

ZoomResult zoom(const Efsm& model, const std::string& state_id,
                const std::vector<ConcreteTrace>& raw_traces);

nlohmann::ordered_json zoom_to_json(const ZoomResult& result);

}  // namespace tracelens

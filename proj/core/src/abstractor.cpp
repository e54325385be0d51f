#include "tracelens/abstractor.hpp"

#include <algorithm>
#include <map>

#include "tracelens/error.hpp"

namespace tracelens {

using ojson = nlohmann::ordered_json;

nlohmann::ordered_json abstraction_meta(const MonitorConfig& config,
                                        const AbstractOptions& options) {
  ojson meta;
  meta["kind"] = "efsm";
  meta["config"] = config.name;
  meta["constraints"] = ojson::array();
  for (const auto& c : config.constraints) meta["constraints"].push_back(format_constraint(c));
  meta["filters"] = ojson::array();
  for (const auto& f : config.filters) meta["filters"].push_back(format_filter(f));
  meta["fields"] = config.fields;
  meta["functions"] = config.functions;
  meta["eq_epsilon"] = config.eq_epsilon;
  meta["warn_unexplained"] = options.warn_unexplained;
  meta["traces"] = ojson::array();
  return meta;
}

ModelBuilder::ModelBuilder(const MonitorConfig& config, const AbstractOptions& options)
    : config_(config), options_(options), meta_(abstraction_meta(config, options)) {}

ModelBuilder::ModelBuilder(Efsm seed, const MonitorConfig& config,
                           const AbstractOptions& options)
    : ModelBuilder(config, options) {
  if (!seed.meta.contains("constraints")) return;
  if (seed.meta["constraints"] != meta_["constraints"])
    throw Error(ErrorCode::kAbstractConfigMismatch,
                "model was built with constraints " + seed.meta["constraints"].dump() +
                    ", config has " + meta_["constraints"].dump());
  std::map<std::string, std::size_t> index;
  for (auto& s : seed.states) {
    index[s.id] = states_.size();
    by_valuation_[s.valuation] = states_.size();
    states_.push_back(std::move(s));
  }
  for (const auto& t : seed.transitions)
    transitions_.emplace(index.at(t.from), t.label, index.at(t.to));
  warnings_.insert(seed.warnings.begin(), seed.warnings.end());
  if (seed.meta.contains("traces"))
    for (const auto& t : seed.meta["traces"]) traces_.insert(t.get<std::string>());
}

std::size_t ModelBuilder::state_for(const Valuation& valuation) {
  auto [it, fresh] = by_valuation_.emplace(valuation, states_.size());
  if (fresh) {
    EfsmState s;
    s.id = "s" + std::to_string(states_.size());
    s.valuation = valuation;
    s.label = describe(config_.constraints, valuation);
    states_.push_back(std::move(s));
  }
  return it->second;
}

void ModelBuilder::close_segment(std::int64_t end) {
  if (!current_) return;
  if (end > segment_start_)
    states_[*current_].segments.push_back({trace_id_, segment_start_, end});
  current_.reset();
}

void ModelBuilder::begin_trace(const std::string& trace_id,
                               const std::vector<std::string>& fields,
                               const std::vector<Value>& initial, std::int64_t first_seq) {
  trace_id_ = trace_id;
  traces_.insert(trace_id);
  evaluator_.emplace(config_, fields);
  current_.reset();
  if (initial.empty() || !evaluator_->admits(initial)) return;
  std::size_t s = state_for(evaluator_->evaluate(initial));
  states_[s].initial = true;
  current_ = s;
  segment_start_ = first_seq;
}

void ModelBuilder::step(const FilteredStep& step) {
  if (!evaluator_->admits(step.vars)) {
    close_segment(step.exit_seq);
    return;
  }
  std::size_t target = state_for(evaluator_->evaluate(step.vars));
  if (!current_) {
    // Entry after a filtered-out gap: no connecting edge.
    states_[target].initial = true;
    current_ = target;
    segment_start_ = step.exit_seq;
    return;
  }
  transitions_.emplace(*current_, step.fn, target);
  if (target != *current_) {
    close_segment(step.exit_seq);
    current_ = target;
    segment_start_ = step.exit_seq;
  }
}

void ModelBuilder::unexplained(const UnexplainedChange& change) {
  if (!options_.warn_unexplained) return;
  if (change.fn.empty())
    warnings_.insert("field " + change.field + " changed outside any traced call");
  else
    warnings_.insert("field " + change.field + " changed by non-selected function " + change.fn);
}

void ModelBuilder::end_trace(std::int64_t last_seq) {
  close_segment(last_seq + 1);
  evaluator_.reset();
}

Efsm ModelBuilder::finish() && {
  // Renumber by valuation so ids do not depend on trace order.
  std::vector<std::size_t> order(states_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return states_[a].valuation < states_[b].valuation;
  });
  std::vector<std::string> new_id(states_.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank)
    new_id[order[rank]] = "s" + std::to_string(rank);

  Efsm model;
  model.meta = std::move(meta_);
  for (const auto& t : traces_) model.meta["traces"].push_back(t);
  for (std::size_t i = 0; i < states_.size(); ++i) {
    states_[i].id = new_id[i];
    model.states.push_back(std::move(states_[i]));
  }
  for (const auto& [from, label, to] : transitions_)
    model.transitions.push_back({new_id[from], new_id[to], label});
  model.warnings.assign(warnings_.begin(), warnings_.end());
  model.sort_canonical();
  return model;
}

Efsm abstract_append(const Efsm& model, const FilteredTrace& trace,
                     const MonitorConfig& config, const AbstractOptions& options) {
  ModelBuilder builder(model, config, options);
  builder.begin_trace(trace.origin.empty() ? trace.id : trace.origin, trace.fields,
                      trace.initial, trace.first_seq);
  for (const auto& s : trace.steps) builder.step(s);
  for (const auto& u : trace.unexplained) builder.unexplained(u);
  builder.end_trace(trace.last_seq);
  return std::move(builder).finish();
}

Efsm build_model(const std::vector<FilteredTrace>& traces, const MonitorConfig& config,
                 const AbstractOptions& options) {
  if (traces.empty()) {
    Efsm empty;
    empty.meta = abstraction_meta(config, options);
    return empty;
  }
  ModelBuilder builder(config, options);
  for (const auto& trace : traces) {
    builder.begin_trace(trace.origin.empty() ? trace.id : trace.origin, trace.fields,
                        trace.initial, trace.first_seq);
    for (const auto& s : trace.steps) builder.step(s);
    for (const auto& u : trace.unexplained) builder.unexplained(u);
    builder.end_trace(trace.last_seq);
  }
  return std::move(builder).finish();
}

// ---------------------------------------------------------------------------
// Zoom

std::size_t ZoomResult::node_count() const {
  std::size_t n = 0;
  for (const auto& p : paths) n += p.nodes.size();
  return n;
}

std::size_t ZoomResult::edge_count() const {
  std::size_t n = 0;
  for (const auto& p : paths) n += p.edge_labels.size();
  return n;
}

ZoomResult zoom(const Efsm& model, const std::string& state_id,
                const std::vector<ConcreteTrace>& raw_traces) {
  const EfsmState* state = model.find_state(state_id);
  if (!state) throw Error(ErrorCode::kZoomUnknownState, "no state '" + state_id + "'");
  std::map<std::string, const ConcreteTrace*> by_id;
  for (const auto& t : raw_traces) by_id[t.id] = &t;

  ZoomResult out;
  out.state = state_id;
  auto segments = state->segments;
  std::sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) {
    return std::tie(a.start, a.trace, a.end) < std::tie(b.start, b.trace, b.end);
  });
  for (const auto& seg : segments) {
    auto it = by_id.find(seg.trace);
    if (it == by_id.end())
      throw Error(ErrorCode::kZoomMissingTrace, "raw trace '" + seg.trace + "' is not available");
    const ConcreteTrace& trace = *it->second;
    ZoomPath path;
    path.trace = seg.trace;
    auto first = std::lower_bound(
        trace.events.begin(), trace.events.end(), seg.start,
        [](const TraceEvent& e, std::int64_t s) { return e.seq < s; });
    for (auto e = first; e != trace.events.end() && e->seq < seg.end; ++e) {
      if (!path.nodes.empty()) path.edge_labels.push_back(e->fn);
      path.nodes.push_back({e->seq, e->kind, e->fn, e->depth, trace.snapshot(*e)});
    }
    out.paths.push_back(std::move(path));
  }
  return out;
}

nlohmann::ordered_json zoom_to_json(const ZoomResult& result) {
  ojson out;
  out["state"] = result.state;
  out["node_count"] = result.node_count();
  out["edge_count"] = result.edge_count();
  out["paths"] = ojson::array();
  for (const auto& p : result.paths) {
    ojson path;
    path["trace"] = p.trace;
    path["nodes"] = ojson::array();
    for (const auto& n : p.nodes) {
      ojson node;
      node["seq"] = n.seq;
      node["kind"] = n.kind == EventKind::kEnter ? "enter" : "exit";
      node["fn"] = n.fn;
      node["depth"] = n.depth;
      ojson vars = ojson::object();
      for (const auto& [k, v] : n.vars) {
        if (v.is_int()) vars[k] = v.as_int();
        else vars[k] = v.as_double();
      }
      node["vars"] = std::move(vars);
      path["nodes"].push_back(std::move(node));
    }
    path["edges"] = p.edge_labels;
    out["paths"].push_back(std::move(path));
  }
  return out;
}

}  // namespace tracelens

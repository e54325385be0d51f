#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tracelens/model.hpp"

namespace tracelens {

// ---------------------------------------------------------------------------
// Trace line format, one event per line:
//   {"seq":1,"kind":"enter","fn":"f","depth":0,"vars":{"x":0},"args":{}}
// `args` appears on enter lines only.

std::string format_event(const TraceEvent& event,
                         const std::vector<std::string>& fields);

// Incremental reader: validates JSON shape, strictly increasing seq, and
// enter/exit nesting as events are pulled.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in);

  std::optional<TraceEvent> next();
  const std::vector<std::string>& fields() const { return fields_; }
  std::size_t line_number() const { return line_no_; }

 private:
  std::istream& in_;
  std::vector<std::string> fields_;
  std::vector<std::pair<std::string, int>> stack_;
  std::optional<std::int64_t> last_seq_;
  std::size_t line_no_ = 0;
  std::string line_;
};

ConcreteTrace parse_trace(std::istream& in, std::string id);
ConcreteTrace parse_trace_text(const std::string& text, std::string id);
ConcreteTrace load_trace(const std::filesystem::path& path);
void write_trace(std::ostream& out, const ConcreteTrace& trace);
std::string serialize_trace(const ConcreteTrace& trace);

// ---------------------------------------------------------------------------
// Change attribution

struct AttributionRecord {
  std::string field;
  std::int64_t seq = 0;    // seq of the event that first shows the change
  std::string fn;          // empty when no traced call brackets the change
  int depth = -1;
  std::int64_t enter_seq = -1;  // identifies the attributed invocation

  friend bool operator==(const AttributionRecord&,
                         const AttributionRecord&) = default;
};

struct ChangeAttribution {
  std::vector<AttributionRecord> records;
};

// A finished invocation together with the fields credited to it.
struct Invocation {
  std::string fn;
  int depth = 0;
  std::int64_t enter_seq = 0;
  std::int64_t exit_seq = 0;
  std::vector<std::size_t> credited;  // indices into the tracked fields
  std::vector<Value> exit_vars;       // tracked fields only
};

// Streaming attribution. Each boundary between consecutive snapshots where a
// tracked field differs is credited to the deepest open invocation whose
// enter and exit snapshots differ on that field; when none do, to the
// innermost open invocation; when nothing is open, to no function.
// Results for a top-level call are released when it returns, so memory is
// bounded by the largest top-level call rather than the trace.
class Attributor {
 public:
  using Interest = std::function<bool(const std::string&)>;

  // `field_indices` select the tracked fields out of each event's vars.
  Attributor(std::vector<std::size_t> field_indices, double eps,
             Interest keep_invocation);

  void feed(const TraceEvent& event);

  // Drained outputs, in chronological order (records by seq, invocations by
  // exit seq). Only populated once the call stack is empty.
  std::vector<AttributionRecord> take_records();
  std::vector<Invocation> take_invocations();
  bool idle() const { return stack_.empty(); }

  void set_field_names(std::vector<std::string> names) {
    names_ = std::move(names);
  }

 private:
  struct Pending {
    std::size_t field;
    std::int64_t seq;
    std::size_t fallback;  // frame serial of the innermost bracketing call
  };
  struct Frame {
    std::size_t serial;
    std::string fn;
    int depth;
    std::int64_t enter_seq;
    std::vector<Value> enter_vars;
    std::vector<Pending> pending;
  };
  struct Closed {
    std::string fn;
    int depth;
    std::int64_t enter_seq;
    std::int64_t exit_seq;
    std::vector<Value> exit_vars;
    std::vector<std::size_t> credited;
    bool keep;
  };

  void credit(std::size_t serial, std::size_t field, std::int64_t seq);
  void drain();

  std::vector<std::size_t> fields_;
  std::vector<std::string> names_;
  double eps_;
  Interest keep_;
  std::vector<Frame> stack_;
  std::optional<std::vector<Value>> prev_;
  std::size_t next_serial_ = 0;
  std::size_t base_serial_ = 0;  // serial of closed_[0]
  std::vector<std::optional<Closed>> closed_;  // indexed by serial - base
  struct Credit {
    std::size_t serial;
    std::size_t field;
    std::int64_t seq;
  };
  std::vector<Credit> credits_;
  std::vector<AttributionRecord> loose_;  // changes outside any call
  std::vector<AttributionRecord> records_out_;
  std::vector<Invocation> invocations_out_;
};

ChangeAttribution attribute_changes(const ConcreteTrace& trace,
                                    const std::vector<std::string>& fields,
                                    double eps);

// ---------------------------------------------------------------------------
// Filtered traces

struct FilteredStep {
  std::string fn;
  std::int64_t enter_seq = 0;
  std::int64_t exit_seq = 0;
  std::vector<std::string> changed;  // sorted; empty for inert calls
  std::vector<Value> vars;           // after-exit, aligned with fields

  friend bool operator==(const FilteredStep&, const FilteredStep&) = default;
};

struct UnexplainedChange {
  std::string field;
  std::int64_t seq = 0;
  std::string fn;  // non-selected function, or empty for untraced code

  friend bool operator==(const UnexplainedChange&,
                         const UnexplainedChange&) = default;
};

struct FilteredTrace {
  std::string id;
  std::string origin;                // id of the raw trace
  std::vector<std::string> fields;   // config.fields order
  std::vector<Value> initial;        // before-enter snapshot of event 0
  std::int64_t first_seq = 0;
  std::int64_t last_seq = -1;        // < first_seq for an empty trace
  std::vector<FilteredStep> steps;   // selected mutators, by exit seq
  std::vector<FilteredStep> inert;   // selected calls that changed nothing
  std::vector<UnexplainedChange> unexplained;

  bool empty_origin() const { return last_seq < first_seq; }

  friend bool operator==(const FilteredTrace&, const FilteredTrace&) = default;
};

// Streaming variant of filter_trace: feed raw events, collect the result.
class TraceFilter {
 public:
  TraceFilter(const MonitorConfig& config,
              const std::vector<std::string>& trace_fields, std::string id);

  void feed(const TraceEvent& event);
  // Steps/unexplained released since the last call (chronological).
  std::vector<FilteredStep> take_steps();
  std::vector<FilteredStep> take_inert();
  std::vector<UnexplainedChange> take_unexplained();

  const std::vector<Value>& initial() const { return initial_; }
  bool started() const { return started_; }
  std::int64_t first_seq() const { return first_seq_; }
  std::int64_t last_seq() const { return last_seq_; }

 private:
  void collect();

  const MonitorConfig& config_;
  std::vector<std::size_t> indices_;
  std::vector<std::string> names_;
  Attributor attributor_;
  bool started_ = false;
  std::vector<Value> initial_;
  std::int64_t first_seq_ = 0;
  std::int64_t last_seq_ = -1;
  std::vector<FilteredStep> steps_;
  std::vector<FilteredStep> inert_;
  std::vector<UnexplainedChange> unexplained_;
};

FilteredTrace filter_trace(const ConcreteTrace& trace,
                           const MonitorConfig& config);

// Filtered trace files (.ftrc): a header line followed by one line per
// selected call, all JSON.
std::string serialize_filtered(const FilteredTrace& trace);
FilteredTrace parse_filtered(const std::string& text);
FilteredTrace load_filtered(const std::filesystem::path& path);

}  // namespace tracelens

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "tracelens/value.hpp"

namespace tracelens {

// ---------------------------------------------------------------------------
// Symbols

enum class ScalarKind { kInt, kFloat, kBool, kEnum };

std::string_view to_string(ScalarKind kind);
std::optional<ScalarKind> parse_scalar_kind(std::string_view text);

struct FieldDecl {
  std::string path;  // dot-separated, array elements as `name[i]`
  ScalarKind kind = ScalarKind::kInt;
  std::string unit;

  friend bool operator==(const FieldDecl&, const FieldDecl&) = default;
};

struct FunctionDecl {
  std::string name;
  std::string file;
  int line = 0;

  friend bool operator==(const FunctionDecl&, const FunctionDecl&) = default;
};

struct SymbolTable {
  std::vector<FieldDecl> fields;
  std::vector<FunctionDecl> functions;

  const FieldDecl* find_field(std::string_view path) const;
  bool has_function(std::string_view name) const;

  friend bool operator==(const SymbolTable&, const SymbolTable&) = default;
};

// ---------------------------------------------------------------------------
// Monitoring configuration

// Right-hand side of a comparison: another monitored field or a literal.
struct Operand {
  std::variant<std::string, Value> ref;

  static Operand field(std::string path) { return {std::move(path)}; }
  static Operand constant(Value v) { return {v}; }

  bool is_field() const { return std::holds_alternative<std::string>(ref); }
  const std::string& path() const { return std::get<std::string>(ref); }
  const Value& constant_value() const { return std::get<Value>(ref); }

  friend bool operator==(const Operand&, const Operand&) = default;
};

enum class Template { kValueChange, kComparedWith, kComparedWithRange };

struct ConstraintSpec {
  Template kind = Template::kValueChange;
  std::string x;
  std::optional<Operand> y;  // ComparedWith operand, or lower range bound
  std::optional<Operand> z;  // upper range bound

  static ConstraintSpec value_change(std::string x);
  static ConstraintSpec compared_with(std::string x, Operand y);
  static ConstraintSpec compared_with_range(std::string x, Operand y, Operand z);

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

// Inclusive bounds.
struct RangeFilter {
  std::string x;
  double lo = 0;
  double hi = 0;

  friend bool operator==(const RangeFilter&, const RangeFilter&) = default;
};

struct MonitorConfig {
  std::string name;
  std::vector<std::string> fields;
  std::vector<std::string> functions;
  std::vector<ConstraintSpec> constraints;
  std::vector<RangeFilter> filters;
  double eq_epsilon = 0;

  bool selects_function(std::string_view fn) const;

  friend bool operator==(const MonitorConfig&, const MonitorConfig&) = default;
};

struct Finding {
  std::string code;
  std::string message;
};

// Empty iff every referenced field/function exists and the type invariants
// hold. Findings are data; this never throws.
std::vector<Finding> validate_config(const MonitorConfig& config,
                                     const SymbolTable& symbols);

// ---------------------------------------------------------------------------
// Traces

enum class EventKind { kEnter, kExit };

struct TraceEvent {
  std::int64_t seq = 0;
  EventKind kind = EventKind::kEnter;
  std::string fn;
  int depth = 0;
  // Aligned with ConcreteTrace::monitored_fields.
  std::vector<Value> vars;
  // Enter events only; values are kept as JSON literal text.
  std::vector<std::pair<std::string, std::string>> args;
};

struct ConcreteTrace {
  std::string id;
  std::vector<std::string> monitored_fields;
  std::vector<TraceEvent> events;

  std::optional<std::size_t> field_index(std::string_view path) const;
  FieldMap snapshot(const TraceEvent& event) const;
};

// Returns the keys whose values differ. Throws DIFF_KEY_MISMATCH when the
// maps do not share a key set.
std::set<std::string> snapshot_diff(const FieldMap& before,
                                    const FieldMap& after, double eps);

// ---------------------------------------------------------------------------
// Valuations

enum class Token { kLT, kEQ, kGT, kBelow, kAtLo, kWithin, kAtHi, kAbove };

std::string_view to_string(Token token);
std::optional<Token> parse_token(std::string_view text);

// One valuation component: the raw value for ValueChange, a token for the
// comparison templates.
struct Component {
  std::variant<Value, Token> v;

  bool is_raw() const { return std::holds_alternative<Value>(v); }
  const Value& raw() const { return std::get<Value>(v); }
  Token token() const { return std::get<Token>(v); }

  friend bool operator==(const Component&, const Component&) = default;
  friend auto operator<=>(const Component& a, const Component& b) {
    if (a.v.index() != b.v.index())
      return std::partial_ordering(a.v.index() <=> b.v.index());
    if (a.is_raw()) return a.raw() <=> b.raw();
    return std::partial_ordering(a.token() <=> b.token());
  }
};

using Valuation = std::vector<Component>;

std::string component_text(const Component& c);
Component parse_component(std::string_view text);

// ---------------------------------------------------------------------------
// Models

// Residency of an abstract state inside one concrete trace: events with
// start <= seq < end.
struct Segment {
  std::string trace;
  std::int64_t start = 0;
  std::int64_t end = 0;

  friend auto operator<=>(const Segment&, const Segment&) = default;
};

struct EfsmState {
  std::string id;
  Valuation valuation;
  std::string label;
  bool initial = false;
  std::vector<Segment> segments;
};

struct Transition {
  std::string from;
  std::string to;
  std::string label;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Abstract model. Baseline miners produce the same shape with empty
// valuations and no segments (meta.kind == "fsm").
struct Efsm {
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  std::vector<EfsmState> states;
  std::vector<Transition> transitions;
  std::vector<std::string> warnings;

  const EfsmState* find_state(std::string_view id) const;
  std::size_t state_index(std::string_view id) const;  // npos when absent
  void sort_canonical();
};

// Numeric-aware ordering of ids such as "s2" < "s10".
bool id_less(std::string_view a, std::string_view b);

// Plain automaton used by the baseline miners. States are 0..size-1.
struct FsmTransition {
  std::size_t from = 0;
  std::size_t to = 0;
  std::string label;

  friend auto operator<=>(const FsmTransition&, const FsmTransition&) = default;
};

struct Fsm {
  std::size_t state_count = 0;
  std::size_t initial = 0;
  std::set<FsmTransition> transitions;
  // Empty means every state accepts (prefix-closed trace languages).
  std::optional<std::set<std::size_t>> accepting;

  bool is_deterministic() const;
  std::set<std::string> alphabet() const;
};

Efsm to_efsm(const Fsm& fsm, nlohmann::ordered_json meta);
Fsm to_fsm(const Efsm& model);

}  // namespace tracelens

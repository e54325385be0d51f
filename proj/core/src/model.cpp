#include "tracelens/model.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "tracelens/error.hpp"

namespace tracelens {

std::string_view to_string(ScalarKind kind) {
  switch (kind) {
    case ScalarKind::kInt: return "int";
    case ScalarKind::kFloat: return "float";
    case ScalarKind::kBool: return "bool";
    case ScalarKind::kEnum: return "enum";
  }
  return "int";
}

std::optional<ScalarKind> parse_scalar_kind(std::string_view text) {
  if (text == "int") return ScalarKind::kInt;
  if (text == "float") return ScalarKind::kFloat;
  if (text == "bool") return ScalarKind::kBool;
  if (text == "enum") return ScalarKind::kEnum;
  return std::nullopt;
}

const FieldDecl* SymbolTable::find_field(std::string_view path) const {
  for (const auto& f : fields)
    if (f.path == path) return &f;
  return nullptr;
}

bool SymbolTable::has_function(std::string_view name) const {
  return std::any_of(functions.begin(), functions.end(),
                     [&](const FunctionDecl& f) { return f.name == name; });
}

ConstraintSpec ConstraintSpec::value_change(std::string x) {
  return {Template::kValueChange, std::move(x), std::nullopt, std::nullopt};
}

ConstraintSpec ConstraintSpec::compared_with(std::string x, Operand y) {
  return {Template::kComparedWith, std::move(x), std::move(y), std::nullopt};
}

ConstraintSpec ConstraintSpec::compared_with_range(std::string x, Operand y,
                                                   Operand z) {
  return {Template::kComparedWithRange, std::move(x), std::move(y),
          std::move(z)};
}

bool MonitorConfig::selects_function(std::string_view fn) const {
  return std::find(functions.begin(), functions.end(), fn) != functions.end();
}

std::vector<Finding> validate_config(const MonitorConfig& config,
                                     const SymbolTable& symbols) {
  std::vector<Finding> out;
  auto add = [&](std::string code, std::string message) {
    out.push_back({std::move(code), std::move(message)});
  };

  std::set<std::string> seen;
  for (const auto& f : config.fields) {
    if (!seen.insert(f).second) add("DUPLICATE_FIELD", "field '" + f + "' selected twice");
    if (!symbols.find_field(f)) add("UNKNOWN_FIELD", "field '" + f + "' is not in the symbol table");
  }
  seen.clear();
  for (const auto& fn : config.functions) {
    if (!seen.insert(fn).second) add("DUPLICATE_FUNCTION", "function '" + fn + "' selected twice");
    if (!symbols.has_function(fn)) add("UNKNOWN_FUNCTION", "function '" + fn + "' is not in the symbol table");
  }

  auto selected = [&](const std::string& path) {
    return std::find(config.fields.begin(), config.fields.end(), path) !=
           config.fields.end();
  };
  auto check_ref = [&](const std::string& path, const std::string& where) {
    if (!selected(path))
      add("FIELD_NOT_SELECTED", where + " references unselected field '" + path + "'");
  };
  auto check_operand = [&](const std::optional<Operand>& op, const std::string& where) {
    if (op && op->is_field()) check_ref(op->path(), where);
  };

  if (config.constraints.empty())
    add("NO_CONSTRAINTS", "at least one constraint is required for abstraction");

  for (std::size_t i = 0; i < config.constraints.size(); ++i) {
    const auto& c = config.constraints[i];
    std::string where = "constraint " + std::to_string(i);
    check_ref(c.x, where);
    bool arity_ok = true;
    switch (c.kind) {
      case Template::kValueChange: arity_ok = !c.y && !c.z; break;
      case Template::kComparedWith: arity_ok = c.y && !c.z; break;
      case Template::kComparedWithRange: arity_ok = c.y && c.z; break;
    }
    if (!arity_ok) {
      add("TEMPLATE_ARITY", where + " has the wrong number of operands");
      continue;
    }
    check_operand(c.y, where);
    check_operand(c.z, where);
    if (c.kind == Template::kComparedWithRange && !c.y->is_field() &&
        !c.z->is_field() &&
        compare(c.y->constant_value(), c.z->constant_value(), 0) != Relation::kLess)
      add("RANGE_EMPTY", where + " needs a lower bound strictly below the upper bound");
  }

  for (std::size_t i = 0; i < config.filters.size(); ++i) {
    const auto& f = config.filters[i];
    std::string where = "filter " + std::to_string(i);
    check_ref(f.x, where);
    if (f.lo > f.hi) add("FILTER_EMPTY", where + " has lo > hi");
  }

  if (config.eq_epsilon < 0) add("NEGATIVE_EPSILON", "eq_epsilon must be non-negative");
  return out;
}

std::optional<std::size_t> ConcreteTrace::field_index(std::string_view path) const {
  for (std::size_t i = 0; i < monitored_fields.size(); ++i)
    if (monitored_fields[i] == path) return i;
  return std::nullopt;
}

FieldMap ConcreteTrace::snapshot(const TraceEvent& event) const {
  FieldMap out;
  for (std::size_t i = 0; i < monitored_fields.size() && i < event.vars.size(); ++i)
    out.emplace(monitored_fields[i], event.vars[i]);
  return out;
}

std::set<std::string> snapshot_diff(const FieldMap& before,
                                    const FieldMap& after, double eps) {
  if (before.size() != after.size())
    throw Error(ErrorCode::kDiffKeyMismatch, "snapshots have different key sets");
  std::set<std::string> changed;
  auto a = before.begin();
  auto b = after.begin();
  for (; a != before.end(); ++a, ++b) {
    if (a->first != b->first)
      throw Error(ErrorCode::kDiffKeyMismatch,
                  "snapshot key '" + a->first + "' has no counterpart");
    if (differs(a->second, b->second, eps)) changed.insert(a->first);
  }
  return changed;
}

std::string_view to_string(Token token) {
  switch (token) {
    case Token::kLT: return "LT";
    case Token::kEQ: return "EQ";
    case Token::kGT: return "GT";
    case Token::kBelow: return "BELOW";
    case Token::kAtLo: return "AT_LO";
    case Token::kWithin: return "WITHIN";
    case Token::kAtHi: return "AT_HI";
    case Token::kAbove: return "ABOVE";
  }
  return "?";
}

std::optional<Token> parse_token(std::string_view text) {
  static const std::map<std::string_view, Token> kTokens = {
      {"LT", Token::kLT},         {"EQ", Token::kEQ},
      {"GT", Token::kGT},         {"BELOW", Token::kBelow},
      {"AT_LO", Token::kAtLo},    {"WITHIN", Token::kWithin},
      {"AT_HI", Token::kAtHi},    {"ABOVE", Token::kAbove}};
  auto it = kTokens.find(text);
  if (it == kTokens.end()) return std::nullopt;
  return it->second;
}

std::string component_text(const Component& c) {
  if (c.is_raw()) return format_number(c.raw());
  return std::string(to_string(c.token()));
}

Component parse_component(std::string_view text) {
  if (auto t = parse_token(text)) return {*t};
  if (auto v = parse_number(text)) return {*v};
  throw Error(ErrorCode::kModelParse,
              "invalid valuation component '" + std::string(text) + "'");
}

bool id_less(std::string_view a, std::string_view b) {
  auto split = [](std::string_view s) {
    std::size_t i = s.size();
    while (i > 0 && s[i - 1] >= '0' && s[i - 1] <= '9') --i;
    std::uint64_t n = 0;
    bool has_num = i < s.size() && s.size() - i < 19;
    if (has_num) std::from_chars(s.data() + i, s.data() + s.size(), n);
    return std::tuple(s.substr(0, has_num ? i : s.size()), has_num, n, s);
  };
  return split(a) < split(b);
}

const EfsmState* Efsm::find_state(std::string_view id) const {
  for (const auto& s : states)
    if (s.id == id) return &s;
  return nullptr;
}

std::size_t Efsm::state_index(std::string_view id) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].id == id) return i;
  return static_cast<std::size_t>(-1);
}

void Efsm::sort_canonical() {
  std::sort(states.begin(), states.end(),
            [](const EfsmState& a, const EfsmState& b) { return id_less(a.id, b.id); });
  for (auto& s : states) {
    std::sort(s.segments.begin(), s.segments.end());
    s.segments.erase(std::unique(s.segments.begin(), s.segments.end()),
                     s.segments.end());
  }
  auto key_less = [](const Transition& a, const Transition& b) {
    if (a.from != b.from) return id_less(a.from, b.from);
    if (a.label != b.label) return a.label < b.label;
    return id_less(a.to, b.to);
  };
  std::sort(transitions.begin(), transitions.end(), key_less);
  transitions.erase(std::unique(transitions.begin(), transitions.end()),
                    transitions.end());
  std::sort(warnings.begin(), warnings.end());
  warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
}

bool Fsm::is_deterministic() const {
  std::set<std::pair<std::size_t, std::string>> seen;
  for (const auto& t : transitions)
    if (!seen.emplace(t.from, t.label).second) return false;
  return true;
}

std::set<std::string> Fsm::alphabet() const {
  std::set<std::string> out;
  for (const auto& t : transitions) out.insert(t.label);
  return out;
}

Efsm to_efsm(const Fsm& fsm, nlohmann::ordered_json meta) {
  Efsm model;
  model.meta = std::move(meta);
  for (std::size_t i = 0; i < fsm.state_count; ++i) {
    EfsmState s;
    s.id = "s" + std::to_string(i);
    s.initial = i == fsm.initial;
    model.states.push_back(std::move(s));
  }
  for (const auto& t : fsm.transitions)
    model.transitions.push_back(
        {"s" + std::to_string(t.from), "s" + std::to_string(t.to), t.label});
  if (fsm.accepting) {
    auto acc = nlohmann::ordered_json::array();
    for (auto a : *fsm.accepting) acc.push_back("s" + std::to_string(a));
    model.meta["accepting"] = acc;
  }
  model.sort_canonical();
  return model;
}

Fsm to_fsm(const Efsm& model) {
  Fsm fsm;
  fsm.state_count = model.states.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < model.states.size(); ++i) index[model.states[i].id] = i;
  bool found = false;
  for (std::size_t i = 0; i < model.states.size(); ++i) {
    if (model.states[i].initial) {
      fsm.initial = i;
      found = true;
      break;
    }
  }
  if (!found && !model.states.empty()) fsm.initial = 0;
  for (const auto& t : model.transitions)
    fsm.transitions.insert({index.at(t.from), index.at(t.to), t.label});
  if (model.meta.contains("accepting")) {
    std::set<std::size_t> acc;
    for (const auto& a : model.meta["accepting"]) acc.insert(index.at(a.get<std::string>()));
    fsm.accepting = acc;
  }
  return fsm;
}

}  // namespace tracelens

#include "tracelens/constraints.hpp"

#include <cctype>
#include <cmath>

#include "tracelens/error.hpp"

namespace tracelens {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_field_path(std::string_view s) {
  if (s.empty()) return false;
  bool expect_ident = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (expect_ident) {
      if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_')) return false;
      expect_ident = false;
    } else if (c == '.') {
      expect_ident = true;
    } else if (c == '[') {
      std::size_t close = s.find(']', i);
      if (close == std::string_view::npos || close == i + 1) return false;
      for (std::size_t j = i + 1; j < close; ++j)
        if (!std::isdigit(static_cast<unsigned char>(s[j]))) return false;
      i = close;
    } else if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
      return false;
    }
  }
  return !expect_ident;
}

struct Call {
  std::string_view name;
  std::vector<std::string_view> args;
};

Call split_call(std::string_view text) {
  text = trim(text);
  auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw Error(ErrorCode::kConstraintParse, "expected name(args): '" + std::string(text) + "'");
  Call call{trim(text.substr(0, open)), {}};
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  while (true) {
    auto comma = inner.find(',');
    call.args.push_back(trim(inner.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
  }
  return call;
}

std::string parse_path(std::string_view arg, std::string_view text) {
  if (!is_field_path(arg))
    throw Error(ErrorCode::kConstraintParse,
                "invalid field path '" + std::string(arg) + "' in '" + std::string(text) + "'");
  return std::string(arg);
}

Operand parse_operand(std::string_view arg, std::string_view text) {
  if (auto v = parse_number(arg)) return Operand::constant(*v);
  return Operand::field(parse_path(arg, text));
}

double parse_real(std::string_view arg, std::string_view text) {
  auto v = parse_number(arg);
  if (!v)
    throw Error(ErrorCode::kConstraintParse,
                "expected a number, got '" + std::string(arg) + "' in '" + std::string(text) + "'");
  return v->as_double();
}

std::string operand_text(const Operand& op) {
  return op.is_field() ? op.path() : format_number(op.constant_value());
}

Token relation_token(Relation r) {
  switch (r) {
    case Relation::kLess: return Token::kLT;
    case Relation::kEqual: return Token::kEQ;
    case Relation::kGreater: return Token::kGT;
  }
  return Token::kEQ;
}

Token range_token(const Value& x, const Value& lo, const Value& hi, double eps) {
  switch (compare(x, lo, eps)) {
    case Relation::kLess: return Token::kBelow;
    case Relation::kEqual: return Token::kAtLo;
    case Relation::kGreater: break;
  }
  switch (compare(x, hi, eps)) {
    case Relation::kLess: return Token::kWithin;
    case Relation::kEqual: return Token::kAtHi;
    case Relation::kGreater: break;
  }
  return Token::kAbove;
}

}  // namespace

ConstraintSpec parse_constraint(std::string_view text) {
  Call call = split_call(text);
  auto expect = [&](std::size_t n) {
    if (call.args.size() != n)
      throw Error(ErrorCode::kConstraintParse,
                  std::string(call.name) + " takes " + std::to_string(n) +
                      " arguments: '" + std::string(text) + "'");
  };
  if (call.name == "value_change") {
    expect(1);
    return ConstraintSpec::value_change(parse_path(call.args[0], text));
  }
  if (call.name == "cmp") {
    expect(2);
    return ConstraintSpec::compared_with(parse_path(call.args[0], text),
                                         parse_operand(call.args[1], text));
  }
  if (call.name == "range") {
    expect(3);
    return ConstraintSpec::compared_with_range(parse_path(call.args[0], text),
                                               parse_operand(call.args[1], text),
                                               parse_operand(call.args[2], text));
  }
  throw Error(ErrorCode::kConstraintParse,
              "unknown template '" + std::string(call.name) + "'");
}

RangeFilter parse_filter(std::string_view text) {
  Call call = split_call(text);
  if (call.name != "filter" || call.args.size() != 3)
    throw Error(ErrorCode::kConstraintParse,
                "expected filter(x, lo, hi): '" + std::string(text) + "'");
  return {parse_path(call.args[0], text), parse_real(call.args[1], text),
          parse_real(call.args[2], text)};
}

std::string format_constraint(const ConstraintSpec& spec) {
  switch (spec.kind) {
    case Template::kValueChange:
      return "value_change(" + spec.x + ")";
    case Template::kComparedWith:
      return "cmp(" + spec.x + ", " + operand_text(*spec.y) + ")";
    case Template::kComparedWithRange:
      return "range(" + spec.x + ", " + operand_text(*spec.y) + ", " +
             operand_text(*spec.z) + ")";
  }
  return {};
}

std::string format_filter(const RangeFilter& filter) {
  auto num = [](double d) {
    if (std::fabs(d) < 1e15 && d == static_cast<double>(static_cast<std::int64_t>(d)))
      return std::to_string(static_cast<std::int64_t>(d));
    return format_number(Value(d));
  };
  return "filter(" + filter.x + ", " + num(filter.lo) + ", " + num(filter.hi) + ")";
}

std::string describe(const ConstraintSpec& spec, const Component& c) {
  const std::string& x = spec.x;
  if (spec.kind == Template::kValueChange) return x + "==" + component_text(c);
  std::string y = operand_text(*spec.y);
  switch (c.token()) {
    case Token::kLT: return x + "<" + y;
    case Token::kEQ: return x + "==" + y;
    case Token::kGT: return x + ">" + y;
    default: break;
  }
  std::string z = operand_text(*spec.z);
  switch (c.token()) {
    case Token::kBelow: return x + "<" + y;
    case Token::kAtLo: return x + "==" + y;
    case Token::kWithin: return y + "<" + x + "<" + z;
    case Token::kAtHi: return x + "==" + z;
    case Token::kAbove: return x + ">" + z;
    default: break;
  }
  return x;
}

std::string describe(const std::vector<ConstraintSpec>& specs,
                     const Valuation& valuation) {
  std::string out;
  for (std::size_t i = 0; i < specs.size() && i < valuation.size(); ++i) {
    if (i) out += " && ";
    out += describe(specs[i], valuation[i]);
  }
  return out;
}

Evaluator::Evaluator(const MonitorConfig& config,
                     std::span<const std::string> fields)
    : eps_(config.eq_epsilon) {
  auto index_of = [&](const std::string& path) {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i] == path) return i;
    throw Error(ErrorCode::kEvalMissingField,
                "snapshot has no field '" + path + "'");
  };
  auto slot = [&](const std::optional<Operand>& op) {
    Slot s;
    if (!op) return s;
    if (op->is_field()) {
      s.is_field = true;
      s.index = index_of(op->path());
    } else {
      s.constant = op->constant_value();
    }
    return s;
  };
  for (const auto& c : config.constraints)
    constraints_.push_back({c.kind, index_of(c.x), slot(c.y), slot(c.z)});
  for (const auto& f : config.filters)
    filters_.push_back({index_of(f.x), f.lo, f.hi});
}

const Value& Evaluator::resolve(const Slot& slot,
                                std::span<const Value> snapshot) const {
  return slot.is_field ? snapshot[slot.index] : slot.constant;
}

Valuation Evaluator::evaluate(std::span<const Value> snapshot) const {
  Valuation out;
  out.reserve(constraints_.size());
  for (const auto& c : constraints_) {
    const Value& x = snapshot[c.x];
    switch (c.kind) {
      case Template::kValueChange:
        out.push_back({x});
        break;
      case Template::kComparedWith:
        out.push_back({relation_token(compare(x, resolve(c.y, snapshot), eps_))});
        break;
      case Template::kComparedWithRange:
        out.push_back({range_token(x, resolve(c.y, snapshot),
                                   resolve(c.z, snapshot), eps_)});
        break;
    }
  }
  return out;
}

bool Evaluator::admits(std::span<const Value> snapshot) const {
  for (const auto& f : filters_) {
    double v = snapshot[f.x].as_double();
    if (v < f.lo - eps_ || v > f.hi + eps_) return false;
  }
  return true;
}

namespace {

std::vector<std::string> map_keys(const FieldMap& snapshot) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : snapshot) keys.push_back(k);
  return keys;
}

std::vector<Value> map_values(const FieldMap& snapshot) {
  std::vector<Value> vals;
  for (const auto& [k, v] : snapshot) vals.push_back(v);
  return vals;
}

}  // namespace

Valuation evaluate(const FieldMap& snapshot, const MonitorConfig& config) {
  MonitorConfig constraints_only = config;
  constraints_only.filters.clear();
  auto keys = map_keys(snapshot);
  return Evaluator(constraints_only, keys).evaluate(map_values(snapshot));
}

bool admits(const FieldMap& snapshot, const std::vector<RangeFilter>& filters,
            double eps) {
  MonitorConfig filters_only;
  filters_only.filters = filters;
  filters_only.eq_epsilon = eps;
  auto keys = map_keys(snapshot);
  return Evaluator(filters_only, keys).admits(map_values(snapshot));
}

}  // namespace tracelens

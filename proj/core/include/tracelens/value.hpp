#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace tracelens {

// A monitored scalar: a 64-bit signed integer or a 64-bit binary float.
// Booleans and enumerators are stored as integers. The tag is part of the
// identity, so Value{1} and Value{1.0} are different values.
class Value {
 public:
  Value() = default;
  Value(std::int64_t i) : v_(i) {}
  Value(int i) : v_(static_cast<std::int64_t>(i)) {}
  Value(double d) : v_(d) {}

  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_float() const { return std::holds_alternative<double>(v_); }
  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_double() const {
    return is_int() ? static_cast<double>(as_int()) : std::get<double>(v_);
  }

  friend bool operator==(const Value&, const Value&) = default;
  friend std::partial_ordering operator<=>(const Value& a, const Value& b) {
    if (a.v_.index() != b.v_.index()) return a.v_.index() <=> b.v_.index();
    if (a.is_int()) return a.as_int() <=> b.as_int();
    return a.as_double() <=> b.as_double();
  }

 private:
  std::variant<std::int64_t, double> v_{std::int64_t{0}};
};

using FieldMap = std::map<std::string, Value>;

// Canonical text: integers in decimal, floats in shortest round-trip form
// with a ".0" suffix when the digits alone would read back as an integer.
std::string format_number(const Value& v);
std::optional<Value> parse_number(std::string_view text);

// Three-way comparison used by every template. Integer pairs compare
// exactly; any float involvement compares within an absolute epsilon.
enum class Relation { kLess, kEqual, kGreater };
Relation compare(const Value& a, const Value& b, double eps);

inline bool differs(const Value& a, const Value& b, double eps) {
  return compare(a, b, eps) != Relation::kEqual;
}

}  // namespace tracelens

#include "tracelens/value.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

namespace tracelens {

std::string format_number(const Value& v) {
  if (v.is_int()) return std::to_string(v.as_int());
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v.as_double());
  std::string text(buf, end);
  if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
  return text;
}

std::optional<Value> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  bool is_float = text.find_first_of(".eE") != std::string_view::npos;
  if (!is_float) {
    std::int64_t i = 0;
    auto [ptr, ec] = std::from_chars(first, last, i);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return Value(i);
  }
  double d = 0;
  auto [ptr, ec] = std::from_chars(first, last, d);
  if (ec != std::errc() || ptr != last || !std::isfinite(d)) return std::nullopt;
  return Value(d);
}

Relation compare(const Value& a, const Value& b, double eps) {
  if (a.is_int() && b.is_int()) {
    if (a.as_int() < b.as_int()) return Relation::kLess;
    if (a.as_int() > b.as_int()) return Relation::kGreater;
    return Relation::kEqual;
  }
  double x = a.as_double();
  double y = b.as_double();
  if (std::fabs(x - y) <= eps) return Relation::kEqual;
  return x < y ? Relation::kLess : Relation::kGreater;
}

}  // namespace tracelens

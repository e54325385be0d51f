#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tracelens/model.hpp"

namespace tracelens {

// Text forms used in config files and on the command line:
//   value_change(x)   cmp(x, y|<const>)   range(x, y|<const>, z|<const>)
//   filter(x, lo, hi)
ConstraintSpec parse_constraint(std::string_view text);
RangeFilter parse_filter(std::string_view text);
std::string format_constraint(const ConstraintSpec& spec);
std::string format_filter(const RangeFilter& filter);

// Human-readable state invariant for one component, e.g. "altitude<0".
std::string describe(const ConstraintSpec& spec, const Component& component);
std::string describe(const std::vector<ConstraintSpec>& specs,
                     const Valuation& valuation);

Valuation evaluate(const FieldMap& snapshot, const MonitorConfig& config);
bool admits(const FieldMap& snapshot, const std::vector<RangeFilter>& filters,
            double eps);

// Constraint evaluation compiled against a fixed field order, for the hot
// path where snapshots are positional vectors.
class Evaluator {
 public:
  Evaluator(const MonitorConfig& config, std::span<const std::string> fields);

  Valuation evaluate(std::span<const Value> snapshot) const;
  bool admits(std::span<const Value> snapshot) const;

 private:
  struct Slot {
    bool is_field = false;
    std::size_t index = 0;
    Value constant;
  };
  struct Compiled {
    Template kind;
    std::size_t x = 0;
    Slot y;
    Slot z;
  };
  struct CompiledFilter {
    std::size_t x = 0;
    double lo = 0;
    double hi = 0;
  };

  const Value& resolve(const Slot& slot, std::span<const Value> snapshot) const;

  std::vector<Compiled> constraints_;
  std::vector<CompiledFilter> filters_;
  double eps_ = 0;
};

}  // namespace tracelens

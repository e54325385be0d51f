#include "tracelens/flight_demo.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "tracelens/error.hpp"
#include "tracelens/symbols.hpp"

namespace tracelens::demo {
namespace {

// Kept byte-identical to data/flight/flight.c.
constexpr const char* kSource = R"(/* Simulated autopilot used by `tracelens demo`. */

#include <stdbool.h>

int gear = 0;
double speed = 0.0;
double takeOffSpeed = 60.0;
double altitude = -1.0;
double groundAlt = 0.0;
double safeAltForGearRetract = 100.0;

#define ACCEL_STEP 10.0
#define CLIMB_STEP 25.0
#define ROLL_STEP 5.0

void accelerate(void)
{
    speed += ACCEL_STEP;
}

void takeoff(void)
{
    if (altitude < groundAlt) {
        if (speed >= takeOffSpeed)
            altitude = groundAlt + CLIMB_STEP;
        else
            speed += ROLL_STEP;
        return;
    }
    altitude += CLIMB_STEP;
}

void retractGear(void)
{
    if (gear == 0 && altitude > safeAltForGearRetract)
        gear = 1;
}

void tick(int n)
{
    accelerate();
    takeoff();
    retractGear();
}
)";

const std::vector<std::string> kFields = {
    "gear", "speed", "takeOffSpeed", "altitude", "groundAlt", "safeAltForGearRetract"};

struct Plane {
  std::int64_t gear = 0;
  double speed = 0;
  double altitude = 0;
};

class Recorder {
 public:
  Recorder(const FlightParams& p, Plane& plane) : p_(p), plane_(plane) {}

  void enter(const std::string& fn, std::vector<std::pair<std::string, std::string>> args = {}) {
    TraceEvent ev{seq_++, EventKind::kEnter, fn, depth_++, snapshot(), std::move(args)};
    events.push_back(std::move(ev));
  }
  void exit(const std::string& fn) {
    TraceEvent ev{seq_++, EventKind::kExit, fn, --depth_, snapshot(), {}};
    events.push_back(std::move(ev));
  }

  std::vector<TraceEvent> events;

 private:
  std::vector<Value> snapshot() const {
    return {Value(plane_.gear), Value(plane_.speed), Value(p_.take_off_speed),
            Value(plane_.altitude), Value(p_.ground_alt),
            Value(p_.safe_alt_for_gear_retract)};
  }

  const FlightParams& p_;
  Plane& plane_;
  std::int64_t seq_ = 1;
  int depth_ = 0;
};

void validate(const FlightParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v))
      throw Error(ErrorCode::kInvalidArgument, std::string(name) + " must be positive");
  };
  positive(p.take_off_speed, "takeOffSpeed");
  positive(p.safe_alt_for_gear_retract, "safeAltForGearRetract");
  positive(p.accel_step, "accel_step");
  positive(p.climb_step, "climb_step");
  positive(p.roll_step, "roll_step");
  if (!std::isfinite(p.ground_alt))
    throw Error(ErrorCode::kInvalidArgument, "groundAlt must be finite");
  if (p.ticks < 1) throw Error(ErrorCode::kInvalidArgument, "ticks must be >= 1");
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::kTakeoff: return "takeoff";
    case Scenario::kTakeoffWithGear: return "takeoff_with_gear";
    case Scenario::kFullFlight: return "full_flight";
    case Scenario::kBuggyTakeoff: return "buggy_takeoff";
  }
  return "takeoff";
}

Scenario parse_scenario(std::string_view name) {
  for (auto s : {Scenario::kTakeoff, Scenario::kTakeoffWithGear, Scenario::kFullFlight,
                 Scenario::kBuggyTakeoff})
    if (to_string(s) == name) return s;
  throw Error(ErrorCode::kInvalidArgument, "unknown scenario '" + std::string(name) + "'");
}

void apply_param(FlightParams& params, std::string_view assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw Error(ErrorCode::kInvalidArgument, "expected key=value, got '" + std::string(assignment) + "'");
  std::string key(assignment.substr(0, eq));
  std::string_view text = assignment.substr(eq + 1);
  auto num = parse_number(text);
  if (!num)
    throw Error(ErrorCode::kInvalidArgument, "bad value for '" + key + "': '" + std::string(text) + "'");
  double v = num->as_double();
  if (key == "takeOffSpeed") params.take_off_speed = v;
  else if (key == "groundAlt") params.ground_alt = v;
  else if (key == "safeAltForGearRetract") params.safe_alt_for_gear_retract = v;
  else if (key == "accel_step") params.accel_step = v;
  else if (key == "climb_step") params.climb_step = v;
  else if (key == "roll_step") params.roll_step = v;
  else if (key == "ticks") {
    if (!num->is_int()) throw Error(ErrorCode::kInvalidArgument, "ticks must be an integer");
    params.ticks = static_cast<int>(num->as_int());
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown parameter '" + key + "'");
  }
}

ConcreteTrace run_scenario(const FlightScenario& scenario) {
  const FlightParams& p = scenario.params;
  validate(p);
  const bool gear_logic = scenario.name != Scenario::kTakeoff;
  const bool capped = scenario.name == Scenario::kFullFlight;
  const double max_speed = 2 * p.take_off_speed;
  const double max_altitude = p.ground_alt + 4 * p.safe_alt_for_gear_retract;

  Plane plane;
  plane.altitude = p.ground_alt - 1;
  Recorder rec(p, plane);

  for (int t = 1; t <= p.ticks; ++t) {
    rec.enter("tick", {{"n", std::to_string(t)}});

    rec.enter("accelerate");
    if (!capped || plane.speed < max_speed) plane.speed += p.accel_step;
    rec.exit("accelerate");

    rec.enter("takeoff");
    if (plane.altitude < p.ground_alt) {
      if (plane.speed >= p.take_off_speed) plane.altitude = p.ground_alt + p.climb_step;
      else plane.speed += p.roll_step;
    } else if (!capped || plane.altitude < max_altitude) {
      plane.altitude += p.climb_step;
    }
    rec.exit("takeoff");

    if (gear_logic) {
      rec.enter("retractGear");
      double threshold = scenario.name == Scenario::kBuggyTakeoff ? p.ground_alt
                                                                  : p.safe_alt_for_gear_retract;
      if (plane.gear == 0 && plane.altitude > threshold) plane.gear = 1;
      rec.exit("retractGear");
    }

    rec.exit("tick");
    if (!gear_logic && plane.altitude >= p.ground_alt) break;
  }

  ConcreteTrace trace;
  trace.id = std::string(to_string(scenario.name));
  trace.monitored_fields = kFields;
  trace.events = std::move(rec.events);
  return trace;
}

SymbolTable demo_symbols() {
  SymbolTable table = scan_text(kSource, "flight.c").symbols;
  for (auto& f : table.fields) {
    if (f.path == "speed" || f.path == "takeOffSpeed") f.unit = "kn";
    else if (f.path != "gear") f.unit = "ft";
  }
  return table;
}

std::string demo_source() { return kSource; }

}  // namespace tracelens::demo

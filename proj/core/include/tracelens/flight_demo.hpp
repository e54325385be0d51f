#pragma once

#include <map>
#include <string>
#include <string_view>

#include "tracelens/model.hpp"

namespace tracelens::demo {

enum class Scenario { kTakeoff, kTakeoffWithGear, kFullFlight, kBuggyTakeoff };

std::string_view to_string(Scenario s);
Scenario parse_scenario(std::string_view name);

// Autopilot reconstruction. Every tick calls tick(), which calls
// accelerate() and takeoff() and, in the gear scenarios, retractGear().
// While on the ground takeoff() rolls (speed += roll_step) until
// speed >= takeOffSpeed, then lifts off straight to climb_step.
struct FlightParams {
  double take_off_speed = 60;
  double ground_alt = 0;
  double safe_alt_for_gear_retract = 100;
  double accel_step = 10;
  double climb_step = 25;
  double roll_step = 5;
  int ticks = 40;
};

struct FlightScenario {
  Scenario name = Scenario::kTakeoff;
  FlightParams params;
  std::int64_t seed = 0;  // reserved; scenarios are deterministic
};

// Applies `key=value` overrides using the monitored-field spellings
// (takeOffSpeed, groundAlt, safeAltForGearRetract) plus accel_step,
// climb_step, roll_step and ticks.
void apply_param(FlightParams& params, std::string_view assignment);

ConcreteTrace run_scenario(const FlightScenario& scenario);

// Monitored fields and functions of the simulated autopilot.
SymbolTable demo_symbols();

// C source the symbol table corresponds to.
std::string demo_source();

}  // namespace tracelens::demo

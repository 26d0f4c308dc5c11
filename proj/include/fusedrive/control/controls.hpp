#pragma once

#include <array>

#include "fusedrive/control/pid.hpp"
#include "fusedrive/control/types.hpp"

namespace fusedrive::control {

// How the waypoint-branch controls and the dynamic-branch adjustment are
// merged before denormalization.
enum class CombineMode {
  Mean,      // s = (raw + adjustment) / 2
  ClampSum,  // s = clamp(raw + adjustment, 0, 1)
};

inline constexpr double kBrakeThreshold = 0.5;

// Map normalized s in [0,1]^3 to a command: steering = 2 s0 - 1,
// throttle = 0.75 s1, brake = s2 >= 0.5.
ControlCommand denormalize(const std::array<double, 3>& s);

ControlCommand combine_controls(const std::array<double, 3>& raw,
                                const std::array<double, 3>& adjustment,
                                CombineMode mode = CombineMode::Mean);

struct PidControlConfig {
  double waypoint_dt = 0.5;      // seconds between consecutive waypoints
  double max_speed = 4.0;        // desired-speed cap, m/s
  double brake_speed = 0.4;      // brake when desired speed falls below this
  double overshoot_ratio = 1.1;  // brake when speed > ratio * desired
  double control_dt = 0.05;      // PID derivative time step
};

// Follow predicted waypoints with the two PID controllers. The aim point is
// the mean of the first two waypoints; desired speed comes from their
// spacing.
ControlCommand pid_control(const WaypointSet& waypoints, double speed, PidState& lateral,
                           PidState& longitudinal, const PidControlConfig& cfg = {});

// Heading error to a local aim point, in degrees, positive to the right.
double aim_angle_deg(Vec2 aim_local);

// Blend of the network and PID commands. steering/throttle are
// beta*mlp + (1-beta)*pid; brake fires if the blended brake is positive,
// which is an OR for beta in (0,1) and selects one input at the endpoints.
ControlCommand control_arbitration(const ControlCommand& mlp, const ControlCommand& pid,
                                   double beta);

}  // namespace fusedrive::control

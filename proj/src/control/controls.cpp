#include "fusedrive/control/controls.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fusedrive/common/errors.hpp"
#include "fusedrive/geometry/transform.hpp"

namespace fusedrive::control {

bool ControlCommand::in_range() const {
  return steering >= -1.0 && steering <= 1.0 && throttle >= 0.0 && throttle <= kMaxThrottle &&
         (brake == 0 || brake == 1);
}

std::string to_string(Command c) {
  switch (c) {
    case Command::Left: return "left";
    case Command::Right: return "right";
    case Command::Straight: return "straight";
    case Command::Follow: return "follow";
    case Command::Stop: return "stop";
    case Command::Other: return "other";
  }
  return "other";
}

Command command_from_string(const std::string& s) {
  if (s == "left") return Command::Left;
  if (s == "right") return Command::Right;
  if (s == "straight") return Command::Straight;
  if (s == "follow") return Command::Follow;
  if (s == "stop") return Command::Stop;
  if (s == "other") return Command::Other;
  throw InvalidInput("unknown command: " + s);
}

std::array<float, kMeasurementDim> MeasurementVector::to_array() const {
  std::array<float, kMeasurementDim> v{};
  v[0] = static_cast<float>(speed);
  v[1 + static_cast<int>(command)] = 1.0f;
  v[1 + kNumCommands] = static_cast<float>(route_point_local.x);
  v[2 + kNumCommands] = static_cast<float>(route_point_local.y);
  return v;
}

ControlCommand denormalize(const std::array<double, 3>& s) {
  ControlCommand cmd;
  cmd.steering = std::clamp(2.0 * s[0] - 1.0, -1.0, 1.0);
  cmd.throttle = std::clamp(kMaxThrottle * s[1], 0.0, kMaxThrottle);
  cmd.brake = s[2] >= kBrakeThreshold ? 1 : 0;
  return cmd;
}

ControlCommand combine_controls(const std::array<double, 3>& raw,
                                const std::array<double, 3>& adjustment, CombineMode mode) {
  std::array<double, 3> s{};
  for (int i = 0; i < 3; ++i) {
    if (!(raw[i] >= 0.0 && raw[i] <= 1.0) || !(adjustment[i] >= 0.0 && adjustment[i] <= 1.0)) {
      throw InvalidInput("combine_controls: inputs must lie in [0,1]");
    }
    s[i] = mode == CombineMode::Mean ? 0.5 * (raw[i] + adjustment[i])
                                     : std::min(1.0, raw[i] + adjustment[i]);
  }
  return denormalize(s);
}

double aim_angle_deg(Vec2 aim_local) {
  // Forward is -y in the local frame.
  return geometry::rad_to_deg(std::atan2(aim_local.x, -aim_local.y));
}

ControlCommand pid_control(const WaypointSet& waypoints, double speed, PidState& lateral,
                           PidState& longitudinal, const PidControlConfig& cfg) {
  const Vec2 w1 = waypoints.points[0];
  const Vec2 w2 = waypoints.points[1];
  if (geometry::norm(w1) < 1e-9 && geometry::norm(w2) < 1e-9) {
    return {0.0, 0.0, 1};
  }

  const Vec2 aim = 0.5 * (w1 + w2);
  const double angle_error = aim_angle_deg(aim) / 90.0;
  ControlCommand cmd;
  cmd.steering = std::clamp(pid_step(lateral, angle_error, cfg.control_dt), -1.0, 1.0);

  const double desired = std::min(geometry::distance(w2, w1) / cfg.waypoint_dt, cfg.max_speed);
  const bool brake = desired < cfg.brake_speed || speed > cfg.overshoot_ratio * desired;
  const double throttle = pid_step(longitudinal, desired - speed, cfg.control_dt);
  cmd.throttle = brake ? 0.0 : std::clamp(throttle, 0.0, kMaxThrottle);
  cmd.brake = brake ? 1 : 0;
  return cmd;
}

ControlCommand control_arbitration(const ControlCommand& mlp, const ControlCommand& pid,
                                   double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidInput("control_arbitration: beta outside [0,1]");
  if (beta == 1.0) return mlp;
  if (beta == 0.0) return pid;
  ControlCommand out;
  out.steering = std::clamp(beta * mlp.steering + (1.0 - beta) * pid.steering, -1.0, 1.0);
  out.throttle = std::clamp(beta * mlp.throttle + (1.0 - beta) * pid.throttle, 0.0, kMaxThrottle);
  out.brake = (beta * mlp.brake + (1.0 - beta) * pid.brake) > 0.0 ? 1 : 0;
  return out;
}

}  // namespace fusedrive::control

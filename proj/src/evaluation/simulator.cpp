#include "fusedrive/evaluation/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::evaluation {

using geometry::deg_to_rad;
using geometry::normalize_angle_deg;
using geometry::rad_to_deg;

SimState simulate_step(const SimState& state, const control::ControlCommand& cmd, double dt,
                       const VehicleParams& params) {
  if (!(dt > 0.0 && dt <= 0.5)) throw InvalidInput("simulate_step: dt must lie in (0, 0.5]");
  SimState next = state;

  const double steering = std::clamp(cmd.steering, -1.0, 1.0);
  const double throttle = std::clamp(cmd.throttle, 0.0, 1.0);
  const double accel = cmd.brake ? -params.brake_decel : params.max_accel * throttle;
  const double v0 = state.speed;
  const double v1 = std::max(0.0, v0 + (accel - params.drag * v0) * dt);
  const double v = 0.5 * (v0 + v1);

  const double delta = deg_to_rad(steering * params.max_steer_deg);
  const double omega = v * std::tan(delta) / params.wheelbase;
  const double theta0 = deg_to_rad(state.pose.heading_deg);
  if (std::abs(omega) > 1e-12) {
    const double theta1 = theta0 + omega * dt;
    next.pose.x += v / omega * (std::sin(theta1) - std::sin(theta0));
    next.pose.y += v / omega * (std::cos(theta0) - std::cos(theta1));
    next.pose.heading_deg = normalize_angle_deg(rad_to_deg(theta1));
  } else {
    next.pose.x += v * dt * std::cos(theta0);
    next.pose.y += v * dt * std::sin(theta0);
  }
  next.speed = v1;
  next.time = state.time + dt;

  for (auto& npc : next.npcs) {
    if (!npc.active) continue;
    npc.position.x += npc.velocity.x * dt;
    npc.position.y += npc.velocity.y * dt;
  }
  return next;
}

std::vector<Vec2> ego_circles(const SimState& state, const VehicleParams& params, double& radius) {
  // Reference point is the rear axle; the body extends ~0.9 m behind it.
  radius = 0.5 * params.width;
  const double h = deg_to_rad(state.pose.heading_deg);
  const Vec2 dir{std::cos(h), std::sin(h)};
  const double rear = -0.9;
  const double step = (params.length - params.width) / 2.0;
  std::vector<Vec2> centers;
  for (int i = 0; i < 3; ++i) {
    const double d = rear + 0.5 * params.width + i * step;
    centers.push_back({state.pose.x + d * dir.x, state.pose.y + d * dir.y});
  }
  return centers;
}

}  // namespace fusedrive::evaluation

#include "fusedrive/evaluation/expert.hpp"

#include <algorithm>
#include <cmath>

#include "fusedrive/common/errors.hpp"
#include "fusedrive/control/controls.hpp"

namespace fusedrive::evaluation {

ExpertPolicy::ExpertPolicy(ExpertConfig cfg)
    : cfg_(cfg), lateral_(cfg.lateral), longitudinal_(cfg.longitudinal) {}

void ExpertPolicy::reset() {
  lateral_.reset();
  longitudinal_.reset();
}

double ExpertPolicy::target_speed(const PrivilegedView& view) const {
  if (view.hazard) return 0.0;
  return view.in_intersection ? cfg_.intersection_speed : cfg_.cruise_speed;
}

Vec2 ExpertPolicy::steering_target(const PrivilegedView& view) const {
  const Route& route = *view.route;
  const Vec2 ego{view.pose.x, view.pose.y};
  const double s0 = route.project(ego).s;
  // Walk forward along the route in 0.5 m steps.
  for (double s = s0; s < route.length(); s += 0.5) {
    const Vec2 p = route.point_at(s);
    if (geometry::distance(p, ego) >= cfg_.lookahead) return p;
  }
  // Past the end: extend the final heading.
  const double h = geometry::deg_to_rad(route.heading_at(route.length()));
  const Vec2 end = route.point_at(route.length());
  return {end.x + cfg_.lookahead * std::cos(h), end.y + cfg_.lookahead * std::sin(h)};
}

control::ControlCommand ExpertPolicy::act(const PrivilegedView& view) {
  if (view.route == nullptr) throw InvalidInput("ExpertPolicy: privileged view has no route");
  const Vec2 target = geometry::global_to_local(steering_target(view), view.pose);
  const double heading_error = control::aim_angle_deg(target) / 90.0;

  control::ControlCommand cmd;
  cmd.steering = std::clamp(control::pid_step(lateral_, heading_error, view.dt), -1.0, 1.0);

  const double target_v = target_speed(view);
  const bool brake = target_v < cfg_.brake_speed || view.speed > cfg_.overshoot_ratio * target_v;
  const double u = control::pid_step(longitudinal_, target_v - view.speed, view.dt);
  cmd.brake = brake ? 1 : 0;
  cmd.throttle = brake ? 0.0 : std::clamp(u, 0.0, control::kMaxThrottle);
  return cmd;
}

}  // namespace fusedrive::evaluation

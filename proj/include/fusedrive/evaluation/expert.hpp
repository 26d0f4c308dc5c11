#pragma once

#include "fusedrive/control/pid.hpp"
#include "fusedrive/control/types.hpp"
#include "fusedrive/evaluation/route.hpp"

namespace fusedrive::evaluation {

struct ExpertConfig {
  control::PidGains lateral = control::PidGains::lateral();
  control::PidGains longitudinal = control::PidGains::longitudinal();
  double cruise_speed = 4.0;
  double intersection_speed = 3.0;
  double lookahead = 3.5;  // minimum distance to the steering target
  double brake_speed = 0.4;
  double overshoot_ratio = 1.1;
};

// What the expert may see: exact ego state plus hazard flags computed by the
// simulator from privileged world knowledge.
struct PrivilegedView {
  geometry::VehiclePose pose;
  double speed = 0.0;
  const Route* route = nullptr;
  bool hazard = false;
  bool in_intersection = false;
  double dt = 0.05;
};

// Rule-based driver: lateral PID on the heading error to the first route
// sample at least `lookahead` meters away, longitudinal PID tracking a
// 4.0 / 3.0 / 0.0 m/s target ladder.
class ExpertPolicy {
 public:
  explicit ExpertPolicy(ExpertConfig cfg = {});

  control::ControlCommand act(const PrivilegedView& view);
  double target_speed(const PrivilegedView& view) const;
  // Global steering target for the current pose.
  Vec2 steering_target(const PrivilegedView& view) const;
  void reset();

  const ExpertConfig& config() const { return cfg_; }

 private:
  ExpertConfig cfg_;
  control::PidState lateral_;
  control::PidState longitudinal_;
};

}  // namespace fusedrive::evaluation

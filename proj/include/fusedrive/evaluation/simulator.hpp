#pragma once

#include <vector>

#include "fusedrive/control/types.hpp"
#include "fusedrive/evaluation/metrics.hpp"
#include "fusedrive/evaluation/scene.hpp"

namespace fusedrive::evaluation {

using geometry::VehiclePose;

// Kinematic bicycle referenced at the rear axle.
struct VehicleParams {
  double wheelbase = 2.9;
  double max_steer_deg = 30.0;  // wheel angle at |steering| = 1
  double max_accel = 6.0;       // m/s^2 at full throttle (1.0)
  double brake_decel = 8.0;     // m/s^2 when brake = 1
  double drag = 0.15;           // linear speed damping, 1/s
  double length = 4.5;
  double width = 2.0;
};

struct SimState {
  VehiclePose pose;
  double speed = 0.0;
  double time = 0.0;
  std::vector<Npc> npcs;
  std::vector<InfractionEvent> pending_infractions;
};

// Advance ego and NPCs by dt in (0, 0.5]. Heading is integrated along an
// exact arc for the step's mean speed; speed is clamped at zero.
SimState simulate_step(const SimState& state, const control::ControlCommand& cmd, double dt,
                       const VehicleParams& params = {});

// Centers of the three circles covering the ego footprint.
std::vector<Vec2> ego_circles(const SimState& state, const VehicleParams& params, double& radius);

}  // namespace fusedrive::evaluation

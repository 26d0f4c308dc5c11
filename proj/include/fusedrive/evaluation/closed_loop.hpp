#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fusedrive/common/image.hpp"
#include "fusedrive/control/types.hpp"
#include "fusedrive/evaluation/expert.hpp"
#include "fusedrive/evaluation/metrics.hpp"
#include "fusedrive/evaluation/scene.hpp"
#include "fusedrive/evaluation/simulator.hpp"
#include "fusedrive/geometry/depth.hpp"

namespace fusedrive::evaluation {

enum class ScenarioMode { Normal, Adversarial };

std::string to_string(ScenarioMode m);
ScenarioMode scenario_mode_from_string(const std::string& s);

// Camera composite (left | front | right) for sensor-driven agents.
struct SensorFrame {
  Image8 rgb;
  geometry::EncodedDepthImage depth;
};

struct Observation {
  double time = 0.0;
  double speed = 0.0;
  control::Command command = control::Command::Follow;
  Vec2 route_point_local;
  const SensorFrame* sensors = nullptr;  // set when the agent needs sensors
  PrivilegedView privileged;             // only the expert should read this
};

struct AgentOutput {
  control::ControlCommand control;
  std::optional<control::WaypointSet> waypoints;
};

class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentOutput step(const Observation& obs) = 0;
  virtual bool needs_sensors() const { return false; }
  virtual void reset() {}
};

class ExpertAgent : public Agent {
 public:
  explicit ExpertAgent(ExpertConfig cfg = {}) : policy_(cfg) {}
  AgentOutput step(const Observation& obs) override;
  void reset() override { policy_.reset(); }

 private:
  ExpertPolicy policy_;
};

using SensorRenderer = std::function<SensorFrame(const Scene&, const SimState&)>;

struct HazardConfig {
  double npc_distance = 10.0;      // look-ahead for agents in the lane
  double corridor_half_width = 2.2;
  double red_light_distance = 12.0;
  double stop_sign_distance = 6.0;
};

// Privileged hazard test used by the expert: a red light or uncleared stop
// sign close ahead, or an NPC inside the forward corridor now or within the
// next 1.5 s.
bool hazard_ahead(const Scene& scene, const SimState& state, const HazardConfig& cfg,
                  const std::vector<bool>& stop_signs_cleared);

bool in_intersection(const Route& route, double s);

struct ClosedLoopConfig {
  double dt = 0.05;
  ScenarioMode mode = ScenarioMode::Normal;
  double corridor_half_width = 1.75;
  double blocked_timeout = 90.0;     // seconds nearly stationary before giving up
  double min_average_speed = 1.0;    // sets the route timeout with `timeout_slack`
  double timeout_slack = 30.0;
  double goal_spacing = 20.0;
  double initial_speed = 0.0;
  std::uint64_t seed = 0;
  PenaltyTable penalties = default_penalties();
  VehicleParams vehicle;
  HazardConfig hazard;
};

struct TraceRecord {
  double time = 0.0;
  geometry::VehiclePose pose;
  double speed = 0.0;
  control::ControlCommand control;
  std::optional<control::WaypointSet> waypoints;
  bool hazard = false;
};

struct ClosedLoopResult {
  RouteResult result;
  std::vector<TraceRecord> trace;
  std::vector<Vec2> path;
  std::string termination;
};

// Drive `agent` along the scene's route until it completes, times out, stays
// blocked for `blocked_timeout`, or throws. Deterministic for a fixed config.
ClosedLoopResult run_closed_loop(Agent& agent, const Scene& scene, const ClosedLoopConfig& cfg,
                                 const SensorRenderer& renderer = {});

nlohmann::json to_json(const TraceRecord& rec);
nlohmann::json to_json(const RouteResult& result);

}  // namespace fusedrive::evaluation

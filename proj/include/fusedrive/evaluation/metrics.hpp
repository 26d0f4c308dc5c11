#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fusedrive/control/types.hpp"
#include "fusedrive/geometry/transform.hpp"

namespace fusedrive::evaluation {

using geometry::Vec2;

enum class InfractionType {
  CollisionPedestrian,
  CollisionVehicle,
  CollisionStatic,
  RedLight,
  StopSign,
};

std::string to_string(InfractionType t);
InfractionType infraction_from_string(const std::string& s);

struct InfractionEvent {
  InfractionType type = InfractionType::CollisionStatic;
  Vec2 position;
  double time = 0.0;
};

// Multiplicative penalty per infraction type, each in (0, 1).
using PenaltyTable = std::map<InfractionType, double>;

// Leaderboard-style defaults: pedestrian 0.50, vehicle 0.60, static 0.65,
// red light 0.70, stop sign 0.80.
PenaltyTable default_penalties();

// prod_j p_j^(count_j); 1.0 when no events.
double infraction_penalty(std::span<const InfractionEvent> events, const PenaltyTable& table);

struct RouteResult {
  double route_completion = 0.0;   // RC in [0,1]
  double infraction_penalty = 1.0; // IP in (0,1]
  double driving_score = 0.0;      // RC * IP
  std::vector<InfractionEvent> infractions;
};

RouteResult make_route_result(double rc, std::vector<InfractionEvent> events,
                              const PenaltyTable& table);

// Mean of RC_i * IP_i over routes.
double driving_score(std::span<const RouteResult> results);

// Averages of the per-route RC and IP columns.
double mean_route_completion(std::span<const RouteResult> results);
double mean_infraction_penalty(std::span<const RouteResult> results);

// Per-sample network outputs, in the units of the corresponding labels.
// Brake is the continuous brake activation in [0,1].
struct TaskPrediction {
  double traffic_light = 0.0;
  double speed = 0.0;
  double steering = 0.0;
  double throttle = 0.0;
  double brake = 0.0;
  control::WaypointSet waypoints;
  std::vector<float> segmentation;  // probabilities, any fixed layout
};

struct TaskTruth {
  int traffic_light = 0;
  double speed = 0.0;
  double steering = 0.0;
  double throttle = 0.0;
  double brake = 0.0;
  control::WaypointSet waypoints;
  std::vector<std::uint8_t> segmentation;  // {0,1}, same layout as prediction
};

struct TaskMetrics {
  double acc_tl = 0.0;
  double mae_sp = 0.0;
  double bce_seg = 0.0;
  double mae_wp = 0.0;
  double mae_st = 0.0;
  double mae_th = 0.0;
  double mae_br = 0.0;
  std::size_t samples = 0;
};

// Streams samples so segmentation tensors need not be held at once.
class TaskMetricsAccumulator {
 public:
  void add(const TaskPrediction& pred, const TaskTruth& truth);
  TaskMetrics result() const;
  std::size_t size() const { return n_; }

 private:
  std::size_t n_ = 0;
  double tl_correct_ = 0.0;
  double sp_ = 0.0;
  double wp_ = 0.0;
  double st_ = 0.0;
  double th_ = 0.0;
  double br_ = 0.0;
  double seg_sum_ = 0.0;
  std::size_t seg_count_ = 0;
};

TaskMetrics task_metrics(std::span<const TaskPrediction> predictions,
                         std::span<const TaskTruth> truths);

}  // namespace fusedrive::evaluation

#include "fusedrive/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::evaluation {

std::string to_string(InfractionType t) {
  switch (t) {
    case InfractionType::CollisionPedestrian: return "collision_pedestrian";
    case InfractionType::CollisionVehicle: return "collision_vehicle";
    case InfractionType::CollisionStatic: return "collision_static";
    case InfractionType::RedLight: return "red_light";
    case InfractionType::StopSign: return "stop_sign";
  }
  return "collision_static";
}

InfractionType infraction_from_string(const std::string& s) {
  for (auto t : {InfractionType::CollisionPedestrian, InfractionType::CollisionVehicle,
                 InfractionType::CollisionStatic, InfractionType::RedLight,
                 InfractionType::StopSign}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown infraction type: " + s);
}

PenaltyTable default_penalties() {
  return {
      {InfractionType::CollisionPedestrian, 0.50},
      {InfractionType::CollisionVehicle, 0.60},
      {InfractionType::CollisionStatic, 0.65},
      {InfractionType::RedLight, 0.70},
      {InfractionType::StopSign, 0.80},
  };
}

double infraction_penalty(std::span<const InfractionEvent> events, const PenaltyTable& table) {
  for (const auto& [type, p] : table) {
    if (!(p > 0.0 && p < 1.0)) {
      throw ConfigError("penalty for " + to_string(type) + " must lie in (0,1)");
    }
  }
  std::map<InfractionType, int> counts;
  for (const auto& e : events) ++counts[e.type];
  double ip = 1.0;
  for (const auto& [type, n] : counts) {
    const auto it = table.find(type);
    if (it == table.end()) throw ConfigError("no penalty configured for " + to_string(type));
    ip *= std::pow(it->second, n);
  }
  return ip;
}

RouteResult make_route_result(double rc, std::vector<InfractionEvent> events,
                              const PenaltyTable& table) {
  RouteResult r;
  r.route_completion = std::clamp(rc, 0.0, 1.0);
  r.infraction_penalty = infraction_penalty(events, table);
  r.driving_score = r.route_completion * r.infraction_penalty;
  r.infractions = std::move(events);
  return r;
}

double driving_score(std::span<const RouteResult> results) {
  if (results.empty()) throw InvalidInput("driving_score: no routes");
  double sum = 0.0;
  for (const auto& r : results) sum += r.route_completion * r.infraction_penalty;
  return sum / static_cast<double>(results.size());
}

double mean_route_completion(std::span<const RouteResult> results) {
  if (results.empty()) throw InvalidInput("mean_route_completion: no routes");
  double sum = 0.0;
  for (const auto& r : results) sum += r.route_completion;
  return sum / static_cast<double>(results.size());
}

double mean_infraction_penalty(std::span<const RouteResult> results) {
  if (results.empty()) throw InvalidInput("mean_infraction_penalty: no routes");
  double sum = 0.0;
  for (const auto& r : results) sum += r.infraction_penalty;
  return sum / static_cast<double>(results.size());
}

void TaskMetricsAccumulator::add(const TaskPrediction& pred, const TaskTruth& truth) {
  if (pred.segmentation.size() != truth.segmentation.size()) {
    throw InvalidInput("task_metrics: segmentation sizes differ");
  }
  constexpr double kEps = 1e-7;
  const int tl_pred = pred.traffic_light >= 0.5 ? 1 : 0;
  tl_correct_ += tl_pred == truth.traffic_light ? 1.0 : 0.0;
  sp_ += std::abs(pred.speed - truth.speed);
  st_ += std::abs(pred.steering - truth.steering);
  th_ += std::abs(pred.throttle - truth.throttle);
  br_ += std::abs(pred.brake - truth.brake);
  double wp = 0.0;
  for (int i = 0; i < control::kNumWaypoints; ++i) {
    wp += std::abs(pred.waypoints.points[i].x - truth.waypoints.points[i].x);
    wp += std::abs(pred.waypoints.points[i].y - truth.waypoints.points[i].y);
  }
  wp_ += wp / (2.0 * control::kNumWaypoints);
  for (std::size_t i = 0; i < pred.segmentation.size(); ++i) {
    const double p = std::clamp(static_cast<double>(pred.segmentation[i]), kEps, 1.0 - kEps);
    seg_sum_ += truth.segmentation[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  seg_count_ += pred.segmentation.size();
  ++n_;
}

TaskMetrics TaskMetricsAccumulator::result() const {
  if (n_ == 0) throw InvalidInput("task_metrics: empty sample set");
  const double n = static_cast<double>(n_);
  TaskMetrics m;
  m.samples = n_;
  m.acc_tl = tl_correct_ / n;
  m.mae_sp = sp_ / n;
  m.mae_wp = wp_ / n;
  m.mae_st = st_ / n;
  m.mae_th = th_ / n;
  m.mae_br = br_ / n;
  m.bce_seg = seg_count_ ? seg_sum_ / static_cast<double>(seg_count_) : 0.0;
  return m;
}

TaskMetrics task_metrics(std::span<const TaskPrediction> predictions,
                         std::span<const TaskTruth> truths) {
  if (predictions.size() != truths.size()) {
    throw InvalidInput("task_metrics: prediction and ground-truth counts differ");
  }
  TaskMetricsAccumulator acc;
  for (std::size_t i = 0; i < predictions.size(); ++i) acc.add(predictions[i], truths[i]);
  return acc.result();
}

}  // namespace fusedrive::evaluation

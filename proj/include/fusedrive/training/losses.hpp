#pragma once

#include <array>
#include <string>

#include <torch/torch.h>

#include "fusedrive/model/driving_model.hpp"

namespace fusedrive::training {

// Task order used for loss weights and logs.
enum Task { kSeg = 0, kSteer, kThrottle, kBrake, kWaypoint, kTrafficLight, kStopSign, kVelocity };
inline constexpr int kNumTasks = 8;
const std::array<std::string, kNumTasks>& task_names();

using TaskLosses = std::array<torch::Tensor, kNumTasks>;
using LossWeights = std::array<double, kNumTasks>;

inline constexpr double kBceEpsilon = 1e-7;

// Mean binary cross-entropy over all elements with predictions clamped to
// [eps, 1 - eps] inside the logs, plus the soft dice loss
// 1 - 2 sum(p y) / (sum p + sum y), taken as 0 when both sums vanish.
torch::Tensor seg_loss(const torch::Tensor& pred, const torch::Tensor& gt, double eps = kBceEpsilon);
// 1 - 2|P∩G| / (|P| + |G|); zero when both are empty.
torch::Tensor dice_loss(const torch::Tensor& pred, const torch::Tensor& gt, double eps = kBceEpsilon);
// Same loss evaluated from logits; `pred` must equal sigmoid(logits).
torch::Tensor seg_loss_from_logits(const torch::Tensor& logits, const torch::Tensor& pred, const torch::Tensor& gt,
                                   double eps = kBceEpsilon);
// Plain mean binary cross-entropy (the segmentation metric).
torch::Tensor bce(const torch::Tensor& pred, const torch::Tensor& gt, double eps = kBceEpsilon);
// Mean absolute error.
torch::Tensor task_l1(const torch::Tensor& pred, const torch::Tensor& gt);
// Per-waypoint mean absolute error averaged over the waypoints
// (pred, gt: B x P x 2).
torch::Tensor waypoint_l1(const torch::Tensor& pred, const torch::Tensor& gt);

torch::Tensor total_loss(const TaskLosses& losses, const LossWeights& weights);
double total_loss(const std::array<double, kNumTasks>& losses, const LossWeights& weights);

struct Targets {
  torch::Tensor seg;        // B x classes x H x W one-hot
  torch::Tensor controls;   // B x 3 (steering, throttle, brake)
  torch::Tensor waypoints;  // B x 3 x 2
  torch::Tensor traffic_light;
  torch::Tensor stop_sign;
  torch::Tensor speed;
};

// Control terms are zero when the model has no learned control path.
TaskLosses compute_task_losses(const model::ModelOutput& out, const Targets& targets);

// Tasks that carry a learning signal for this model.
std::array<bool, kNumTasks> active_tasks(const model::ModelConfig& cfg);

}  // namespace fusedrive::training

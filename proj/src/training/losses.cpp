#include "fusedrive/training/losses.hpp"

#include <cmath>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::training {

const std::array<std::string, kNumTasks>& task_names() {
  static const std::array<std::string, kNumTasks> names{"SEG", "ST", "TH", "BR", "WP", "TL", "SS", "VE"};
  return names;
}

namespace {

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
  if (!a.defined() || !b.defined() || a.sizes() != b.sizes()) {
    throw InvalidInput(std::string(what) + ": prediction and target shapes differ");
  }
}

}  // namespace

torch::Tensor bce(const torch::Tensor& pred, const torch::Tensor& gt, double eps) {
  require_same_shape(pred, gt, "bce");
  const auto p = pred.clamp(eps, 1.0 - eps);
  return -(gt * torch::log(p) + (1.0 - gt) * torch::log(1.0 - p)).mean();
}

torch::Tensor seg_loss(const torch::Tensor& pred, const torch::Tensor& gt, double eps) {
  require_same_shape(pred, gt, "seg_loss");
  // Clamping only inside the logs keeps a perfect binary prediction at zero.
  const auto bce_term =
      -(gt * torch::log(pred.clamp_min(eps)) + (1.0 - gt) * torch::log((1.0 - pred).clamp_min(eps))).mean();
  return bce_term + dice_loss(pred, gt, eps);
}

torch::Tensor seg_loss_from_logits(const torch::Tensor& logits, const torch::Tensor& pred, const torch::Tensor& gt,
                                   double eps) {
  require_same_shape(logits, gt, "seg_loss");
  require_same_shape(pred, gt, "seg_loss");
  // Clamping the logit at logit(eps) bounds each term exactly like clamping the probability.
  const double bound = std::log((1.0 - eps) / eps);
  return torch::binary_cross_entropy_with_logits(logits.clamp(-bound, bound), gt) + dice_loss(pred, gt, eps);
}

torch::Tensor dice_loss(const torch::Tensor& pred, const torch::Tensor& gt, double eps) {
  const auto inter = (pred * gt).sum();
  const auto denom = pred.sum() + gt.sum();
  const auto dice = torch::where(denom > 0, 1.0 - 2.0 * inter / denom.clamp_min(eps),
                                 torch::zeros_like(denom));
  return dice;
}

torch::Tensor task_l1(const torch::Tensor& pred, const torch::Tensor& gt) {
  require_same_shape(pred, gt, "task_l1");
  return (pred - gt).abs().mean();
}

torch::Tensor waypoint_l1(const torch::Tensor& pred, const torch::Tensor& gt) {
  require_same_shape(pred, gt, "waypoint_l1");
  if (pred.dim() != 3 || pred.size(2) != 2) throw InvalidInput("waypoint_l1: expected B x P x 2");
  return (pred - gt).abs().mean({0, 2}).mean();
}

torch::Tensor total_loss(const TaskLosses& losses, const LossWeights& weights) {
  torch::Tensor total = weights[0] * losses[0];
  for (int i = 1; i < kNumTasks; ++i) total = total + weights[i] * losses[i];
  return total;
}

double total_loss(const std::array<double, kNumTasks>& losses, const LossWeights& weights) {
  double total = 0.0;
  for (int i = 0; i < kNumTasks; ++i) total += weights[i] * losses[i];
  return total;
}

TaskLosses compute_task_losses(const model::ModelOutput& out, const Targets& t) {
  TaskLosses l;
  l[kSeg] = out.seg_logits.defined() ? seg_loss_from_logits(out.seg_logits, out.seg, t.seg) : seg_loss(out.seg, t.seg);
  if (out.controls.defined()) {
    l[kSteer] = task_l1(out.controls.select(1, 0), t.controls.select(1, 0));
    l[kThrottle] = task_l1(out.controls.select(1, 1), t.controls.select(1, 1));
    l[kBrake] = task_l1(out.controls.select(1, 2), t.controls.select(1, 2));
  } else {
    const auto zero = torch::zeros({}, out.seg.options());
    l[kSteer] = l[kThrottle] = l[kBrake] = zero;
  }
  l[kWaypoint] = waypoint_l1(out.waypoints, t.waypoints);
  l[kTrafficLight] = task_l1(out.traffic_light, t.traffic_light);
  l[kStopSign] = task_l1(out.stop_sign, t.stop_sign);
  l[kVelocity] = task_l1(out.speed, t.speed);
  return l;
}

std::array<bool, kNumTasks> active_tasks(const model::ModelConfig& cfg) {
  std::array<bool, kNumTasks> a;
  a.fill(true);
  if (cfg.ablations.no_vc) a[kSteer] = a[kThrottle] = a[kBrake] = false;
  return a;
}

}  // namespace fusedrive::training

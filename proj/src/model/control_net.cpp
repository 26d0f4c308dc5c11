#include "fusedrive/model/control_net.hpp"

namespace fusedrive::model {

FusionImpl::FusionImpl(int rgb_channels, int sdc_channels, int measurement_dim, int fused_dim) {
  bn = register_module("bn", torch::nn::BatchNorm2d(rgb_channels + sdc_channels));
  fc = register_module("fc", torch::nn::Linear(rgb_channels + sdc_channels + measurement_dim, fused_dim));
}

torch::Tensor FusionImpl::forward(const torch::Tensor& rgb, const torch::Tensor& sdc,
                                  const torch::Tensor& measurement) {
  const auto pooled = bn->forward(torch::cat({rgb, sdc}, 1)).mean({2, 3});
  return fc->forward(torch::cat({pooled, measurement}, 1));
}

BiasModuleImpl::BiasModuleImpl(int channels, int fused_dim) {
  fc = register_module("fc", torch::nn::Linear(channels, fused_dim));
}

torch::Tensor BiasModuleImpl::forward(const torch::Tensor& features) {
  return fc->forward(features.mean({2, 3}));
}

WaypointBranchImpl::WaypointBranchImpl(int fused_dim, int hidden, bool with_controls) {
  gru = register_module("gru", torch::nn::GRUCell(4, fused_dim));
  delta = register_module("delta", torch::nn::Linear(fused_dim, 2));
  if (!with_controls) return;
  fc1 = register_module("fc1", torch::nn::Linear(fused_dim, hidden));
  fc2 = register_module("fc2", torch::nn::Linear(hidden, 3));
}

WaypointBranchOutput WaypointBranchImpl::forward(const torch::Tensor& fused, const torch::Tensor& route_point,
                                                 const torch::Tensor& bypass) {
  WaypointBranchOutput out;
  auto h = fused;
  auto wp = torch::zeros({fused.size(0), 2}, fused.options());
  std::vector<torch::Tensor> points;
  for (int step = 0; step < 3; ++step) {
    const auto input = torch::cat({wp, route_point}, 1);
    out.gru_inputs.push_back(input);
    h = gru->forward(input, h);
    wp = wp + delta->forward(h);
    points.push_back(wp);
  }
  out.waypoints = torch::stack(points, 1);
  if (fc1.is_empty()) return out;
  const auto z = torch::sigmoid(h + bypass);
  out.raw_control = torch::sigmoid(fc2->forward(torch::relu(fc1->forward(z))));
  return out;
}

DynamicBranchImpl::DynamicBranchImpl(int fused_dim, int hidden) {
  gru = register_module("gru", torch::nn::GRUCell(3, fused_dim));
  fc1 = register_module("fc1", torch::nn::Linear(2 * fused_dim, hidden));
  fc2 = register_module("fc2", torch::nn::Linear(hidden, 3));
}

torch::Tensor DynamicBranchImpl::forward(const torch::Tensor& fused, const torch::Tensor& raw_control,
                                         const torch::Tensor& bypass) {
  const auto h = gru->forward(raw_control, fused);
  return torch::sigmoid(fc2->forward(torch::relu(fc1->forward(torch::cat({h, bypass}, 1)))));
}

torch::Tensor denormalize_controls(const torch::Tensor& s) {
  return torch::stack({2.0 * s.select(1, 0) - 1.0, control::kMaxThrottle * s.select(1, 1), s.select(1, 2)}, 1);
}

torch::Tensor merge_controls(const torch::Tensor& raw, const torch::Tensor& adjustment,
                             control::CombineMode mode) {
  if (mode == control::CombineMode::Mean) return 0.5 * (raw + adjustment);
  return torch::clamp(raw + adjustment, 0.0, 1.0);
}

}  // namespace fusedrive::model

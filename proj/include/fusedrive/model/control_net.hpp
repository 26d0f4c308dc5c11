#pragma once

#include <vector>

#include <torch/torch.h>

#include "fusedrive/control/controls.hpp"

namespace fusedrive::model {

// Concatenate image and BEV features, batch-normalize, pool, append the
// measurement vector and project to the fused state.
struct FusionImpl : torch::nn::Module {
  FusionImpl(int rgb_channels, int sdc_channels, int measurement_dim, int fused_dim);
  torch::Tensor forward(const torch::Tensor& rgb, const torch::Tensor& sdc,
                        const torch::Tensor& measurement);

  torch::nn::BatchNorm2d bn{nullptr};
  torch::nn::Linear fc{nullptr};
};
TORCH_MODULE(Fusion);

// Waypoint bypass: global pool + linear on the image features.
struct BiasModuleImpl : torch::nn::Module {
  BiasModuleImpl(int channels, int fused_dim);
  torch::Tensor forward(const torch::Tensor& features);

  torch::nn::Linear fc{nullptr};
};
TORCH_MODULE(BiasModule);

struct WaypointBranchOutput {
  torch::Tensor waypoints;                // B x 3 x 2
  torch::Tensor raw_control;              // B x 3 in [0, 1], or undefined
  std::vector<torch::Tensor> gru_inputs;  // per step, B x 4 (waypoint, route point)
};

// GRU unrolled three times from the fused state. Each step consumes the
// current waypoint (starting at the origin) and the route point, and a
// linear head adds a waypoint offset. The last hidden state plus the
// bypass feeds a small MLP producing normalized controls.
struct WaypointBranchImpl : torch::nn::Module {
  // Without controls (PID-only ablation) the control MLP is not built and
  // raw_control stays undefined.
  WaypointBranchImpl(int fused_dim, int hidden, bool with_controls = true);
  WaypointBranchOutput forward(const torch::Tensor& fused, const torch::Tensor& route_point,
                               const torch::Tensor& bypass);

  torch::nn::GRUCell gru{nullptr};
  torch::nn::Linear delta{nullptr};
  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
};
TORCH_MODULE(WaypointBranch);

// One GRU step from the fused state on the waypoint-branch controls, then
// hidden state concatenated with the bypass through an MLP.
struct DynamicBranchImpl : torch::nn::Module {
  DynamicBranchImpl(int fused_dim, int hidden);
  torch::Tensor forward(const torch::Tensor& fused, const torch::Tensor& raw_control,
                        const torch::Tensor& bypass);

  torch::nn::GRUCell gru{nullptr};
  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
};
TORCH_MODULE(DynamicBranch);

// Normalized controls to continuous (steering, throttle, brake) columns.
torch::Tensor denormalize_controls(const torch::Tensor& s);
// Merge the two branches' normalized controls per the combine mode.
torch::Tensor merge_controls(const torch::Tensor& raw, const torch::Tensor& adjustment,
                             control::CombineMode mode);

}  // namespace fusedrive::model

#pragma once

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "fusedrive/model/config.hpp"
#include "fusedrive/model/control_net.hpp"
#include "fusedrive/perception/networks.hpp"

namespace fusedrive::model {

struct ModelInput {
  torch::Tensor rgb;          // B x 3 x H x W in [0, 1]
  torch::Tensor depth;        // B x H x W planar depth in meters
  torch::Tensor measurement;  // B x 9
  torch::Tensor sdc;          // optional B x classes x H x W; built from the prediction if undefined
};

struct ModelOutput {
  torch::Tensor rgb_features;  // B x C_rgb x h x w
  torch::Tensor sdc_features;  // B x C_sdc x h x w
  torch::Tensor seg;           // B x classes x H x W in [0, 1]
  torch::Tensor seg_logits;    // pre-sigmoid segmentation
  torch::Tensor sdc;           // B x classes x H x W in {0, 1}
  torch::Tensor traffic_light; // B
  torch::Tensor stop_sign;     // B
  torch::Tensor speed;         // B, >= 0
  torch::Tensor fused;         // B x D
  torch::Tensor bypass;        // B x D
  torch::Tensor waypoints;     // B x 3 x 2, local frame (forward is -y)
  torch::Tensor raw_control;   // B x 3 normalized; undefined without the control path
  torch::Tensor adjustment;    // B x 3 normalized; undefined without the control path
  torch::Tensor controls;      // B x 3 continuous (steering, throttle, brake); undefined without it
  std::vector<torch::Tensor> gru_inputs;
};

class DrivingModelImpl : public torch::nn::Module {
 public:
  explicit DrivingModelImpl(const ModelConfig& cfg);

  ModelOutput forward(const ModelInput& in);

  perception::EncoderOutput encode_rgb(const torch::Tensor& rgb);
  torch::Tensor decode_segmentation(const perception::EncoderOutput& enc);
  torch::Tensor decode_segmentation_logits(const perception::EncoderOutput& enc);
  // Per-sample BEV map from the arg-max of `seg` (no gradient) and depth.
  torch::Tensor build_sdc(const torch::Tensor& seg, const torch::Tensor& depth) const;
  torch::Tensor encode_sdc(const torch::Tensor& sdc);

  // Parameters of the last layer shared by all tasks (end of the image encoder).
  std::vector<torch::Tensor> shared_parameters();

  const ModelConfig& config() const { return cfg_; }
  bool has_control_path() const { return !cfg_.ablations.no_vc; }

  perception::CvtEncoder cvt{nullptr};
  perception::CnnEncoder rgb_cnn{nullptr};
  torch::nn::Conv2d rgb_projection{nullptr};
  perception::SegDecoder decoder{nullptr};
  perception::CnnEncoder sdc_encoder{nullptr};
  perception::ProbabilityHead traffic_light_head{nullptr};
  perception::ProbabilityHead stop_sign_head{nullptr};
  perception::SpeedHead speed_head{nullptr};
  Fusion fusion{nullptr};
  BiasModule bias{nullptr};
  WaypointBranch waypoint_branch{nullptr};
  DynamicBranch dynamic_branch{nullptr};

 private:
  ModelConfig cfg_;
  geometry::CameraRig rig_;
};
TORCH_MODULE(DrivingModel);

// Build a model with parameters drawn from a fixed seed.
DrivingModel make_model(const ModelConfig& cfg, std::uint64_t seed);

}  // namespace fusedrive::model

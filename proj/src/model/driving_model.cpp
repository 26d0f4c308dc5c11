#include "fusedrive/model/driving_model.hpp"

#include "fusedrive/common/errors.hpp"
#include "fusedrive/control/types.hpp"
#include "fusedrive/model/tensors.hpp"

namespace fusedrive::model {

DrivingModelImpl::DrivingModelImpl(const ModelConfig& cfg)
    : cfg_(cfg),
      rig_(geometry::CameraRig::standard(cfg.sdc.rows, cfg.sdc.front_cols, cfg.sdc.side_cols)) {
  cfg_.validate();
  const int c_rgb = cfg_.rgb_channels();
  std::array<int, 2> skips{};
  if (cfg_.ablations.no_cvt) {
    rgb_cnn = register_module("rgb_cnn", perception::CnnEncoder(cfg_.rgb_cnn));
    rgb_projection = register_module(
        "rgb_projection",
        torch::nn::Conv2d(torch::nn::Conv2dOptions(cfg_.rgb_cnn.out_channels(), c_rgb, 1)));
    skips = perception::cnn_skip_channels(cfg_.rgb_cnn);
  } else {
    cvt = register_module("cvt", perception::CvtEncoder(cfg_.cvt));
    skips = perception::cvt_skip_channels(cfg_.cvt);
  }
  decoder = register_module("decoder", perception::SegDecoder(c_rgb, skips, cfg_.decoder));
  sdc_encoder = register_module("sdc_encoder", perception::CnnEncoder(cfg_.sdc_encoder));
  traffic_light_head = register_module("traffic_light_head", perception::ProbabilityHead(c_rgb));
  stop_sign_head = register_module("stop_sign_head", perception::ProbabilityHead(c_rgb));
  speed_head = register_module("speed_head", perception::SpeedHead(c_rgb, cfg_.head_hidden));
  fusion = register_module(
      "fusion", Fusion(c_rgb, cfg_.sdc_channels(), control::kMeasurementDim, cfg_.fused_dim));
  bias = register_module("bias", BiasModule(c_rgb, cfg_.fused_dim));
  waypoint_branch = register_module(
      "waypoint_branch", WaypointBranch(cfg_.fused_dim, cfg_.control_hidden, has_control_path()));
  if (has_control_path()) {
    dynamic_branch = register_module("dynamic_branch", DynamicBranch(cfg_.fused_dim, cfg_.control_hidden));
  }
}

perception::EncoderOutput DrivingModelImpl::encode_rgb(const torch::Tensor& rgb) {
  if (rgb.dim() != 4 || rgb.size(1) != 3 || rgb.size(2) != cfg_.image_height ||
      rgb.size(3) != cfg_.image_width) {
    throw InvalidInput("encode_rgb: expected B x 3 x " + std::to_string(cfg_.image_height) + " x " +
                       std::to_string(cfg_.image_width));
  }
  if (!cfg_.ablations.no_cvt) return cvt->forward(rgb);
  auto enc = rgb_cnn->forward(rgb);
  enc.features = rgb_projection->forward(enc.features);
  return enc;
}

torch::Tensor DrivingModelImpl::decode_segmentation(const perception::EncoderOutput& enc) {
  return torch::sigmoid(decode_segmentation_logits(enc));
}

torch::Tensor DrivingModelImpl::decode_segmentation_logits(const perception::EncoderOutput& enc) {
  return decoder->forward(enc.features, enc.skips, cfg_.image_height, cfg_.image_width);
}

torch::Tensor DrivingModelImpl::build_sdc(const torch::Tensor& seg, const torch::Tensor& depth) const {
  if (depth.dim() != 3 || depth.size(0) != seg.size(0) || depth.size(1) != seg.size(2) ||
      depth.size(2) != seg.size(3)) {
    throw InvalidInput("build_sdc: depth must be B x H x W matching the segmentation");
  }
  torch::NoGradGuard no_grad;
  const auto classes = seg.detach().argmax(1).cpu();
  const auto depth_cpu = depth.detach().cpu();
  std::vector<torch::Tensor> maps;
  for (int64_t b = 0; b < seg.size(0); ++b) {
    const auto map = geometry::build_sdc_from_composite(
        tensor_to_depth(depth_cpu[b]), tensor_to_class_map(classes[b]), rig_, cfg_.sdc,
        !cfg_.ablations.no_sdc_sides);
    maps.push_back(sdc_to_tensor(map.grid));
  }
  return torch::stack(maps).to(seg.options());
}

torch::Tensor DrivingModelImpl::encode_sdc(const torch::Tensor& sdc) {
  if (sdc.dim() != 4 || sdc.size(1) != cfg_.sdc.num_classes || sdc.size(2) != cfg_.sdc.rows ||
      sdc.size(3) != cfg_.sdc.merged_cols) {
    throw InvalidInput("encode_sdc: expected B x " + std::to_string(cfg_.sdc.num_classes) + " x " +
                       std::to_string(cfg_.sdc.rows) + " x " + std::to_string(cfg_.sdc.merged_cols));
  }
  return sdc_encoder->forward(sdc).features;
}

ModelOutput DrivingModelImpl::forward(const ModelInput& in) {
  ModelOutput out;
  const auto enc = encode_rgb(in.rgb);
  out.rgb_features = enc.features;
  out.seg_logits = decode_segmentation_logits(enc);
  out.seg = torch::sigmoid(out.seg_logits);
  out.sdc = in.sdc.defined() ? in.sdc : build_sdc(out.seg, in.depth);
  out.sdc_features = encode_sdc(out.sdc);

  out.traffic_light = traffic_light_head->forward(out.rgb_features).squeeze(1);
  out.stop_sign = stop_sign_head->forward(out.rgb_features).squeeze(1);
  out.speed = speed_head->forward(out.rgb_features).squeeze(1);

  if (in.measurement.dim() != 2 || in.measurement.size(1) != control::kMeasurementDim) {
    throw InvalidInput("forward: measurement must be B x 9");
  }
  out.fused = fusion->forward(out.rgb_features, out.sdc_features, in.measurement);
  out.bypass = bias->forward(out.rgb_features);
  const auto route_point = in.measurement.slice(1, 7, 9);
  auto wp = waypoint_branch->forward(out.fused, route_point, out.bypass);
  out.waypoints = wp.waypoints;
  out.gru_inputs = std::move(wp.gru_inputs);
  if (has_control_path()) {
    out.raw_control = wp.raw_control;
    out.adjustment = dynamic_branch->forward(out.fused, out.raw_control, out.bypass);
    out.controls = denormalize_controls(merge_controls(out.raw_control, out.adjustment, cfg_.combine));
  }
  return out;
}

std::vector<torch::Tensor> DrivingModelImpl::shared_parameters() {
  // Every head reads the image features, so the encoder's last layer is the
  // deepest one all eight tasks pass through.
  if (cfg_.ablations.no_cvt) return {rgb_projection->weight};
  auto& last = cvt->stages.back();
  if (last->blocks.empty()) return {last->embed->conv->weight};
  return {last->blocks.back()->fc2->weight};
}

DrivingModel make_model(const ModelConfig& cfg, std::uint64_t seed) {
  torch::manual_seed(seed);
  return DrivingModel(cfg);
}

}  // namespace fusedrive::model

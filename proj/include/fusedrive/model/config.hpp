#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fusedrive/control/controls.hpp"
#include "fusedrive/geometry/sdc.hpp"
#include "fusedrive/training/schedule.hpp"

namespace fusedrive::model {

struct CvtStageConfig {
  int patch = 7;
  int stride = 4;
  int padding = 2;
  int dim = 64;
  int depth = 1;
  int heads = 1;
  int kv_stride = 2;  // stride of the key/value depth-wise projections
  int mlp_ratio = 4;
};

struct CvtConfig {
  int in_channels = 3;
  std::array<CvtStageConfig, 3> stages;
};

// One stage of inverted-residual blocks (expansion, kernel, first-block
// stride, output channels, number of blocks).
struct MbStageConfig {
  int expand = 6;
  int kernel = 3;
  int stride = 1;
  int channels = 16;
  int repeats = 1;
};

struct CnnConfig {
  int in_channels = 23;
  int stem_channels = 32;
  std::vector<MbStageConfig> stages;
  double se_ratio = 0.25;

  int out_channels() const { return stages.back().channels; }
  int total_stride() const;
};

struct DecoderConfig {
  std::array<int, 3> channels{128, 64, 32};
  int num_classes = 23;
};

struct Ablations {
  bool no_sdc_sides = false;  // side cameras contribute nothing to the BEV map
  bool no_cvt = false;        // CNN image encoder instead of the transformer
  bool no_vc = false;         // no learned control path, PID only
};

struct ModelConfig {
  std::string preset = "toy";
  int image_height = 160;
  int image_width = 768;
  CvtConfig cvt;
  CnnConfig sdc_encoder;
  CnnConfig rgb_cnn;  // image encoder used under no_cvt
  DecoderConfig decoder;
  geometry::SdcConfig sdc;
  int fused_dim = 256;
  int head_hidden = 64;
  int control_hidden = 64;
  double arbitration_beta = 0.5;
  control::CombineMode combine = control::CombineMode::Mean;
  control::PidControlConfig pid;
  Ablations ablations;

  int rgb_channels() const { return cvt.stages[2].dim; }
  int sdc_channels() const { return sdc_encoder.out_channels(); }
  int feature_rows() const;
  int feature_cols() const;
  // Throws ConfigError on inconsistent sizes.
  void validate() const;

  static ModelConfig paper();
  static ModelConfig toy();
  static ModelConfig from_preset(const std::string& name);
};

struct TrainConfig {
  int batch_size = 5;
  int max_epochs = 40;
  int max_steps = 0;           // 0 = no step limit
  int steps_per_epoch = 0;     // 0 = one pass over the training split
  std::uint64_t seed = 7;
  double weight_decay = 0.001;
  double val_fraction = 0.0;   // 0 = validate on the training split
  bool mgn = true;
  training::MgnConfig mgn_config;
  training::LrScheduleConfig schedule;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

RunConfig parse_run_config(const std::string& yaml_text);
RunConfig load_run_config(const std::string& path);
// Canonical YAML rendering; parse_run_config(to_yaml(c)) reproduces c.
std::string to_yaml(const RunConfig& cfg);
// FNV-1a over the canonical YAML.
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace fusedrive::model

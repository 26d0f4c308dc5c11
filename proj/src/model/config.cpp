#include "fusedrive/model/config.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::model {

int CnnConfig::total_stride() const {
  int s = 2;  // stem
  for (const auto& st : stages) s *= st.stride;
  return s;
}

int ModelConfig::feature_rows() const {
  int s = 1;
  for (const auto& st : cvt.stages) s *= st.stride;
  return image_height / s;
}

int ModelConfig::feature_cols() const {
  int s = 1;
  for (const auto& st : cvt.stages) s *= st.stride;
  return image_width / s;
}

void ModelConfig::validate() const {
  sdc.validate();
  int stride = 1;
  for (std::size_t i = 0; i < cvt.stages.size(); ++i) {
    const auto& st = cvt.stages[i];
    if (st.dim <= 0 || st.depth < 0 || st.heads <= 0 || st.stride <= 0 || st.kv_stride <= 0) {
      throw ConfigError("cvt stage " + std::to_string(i) + ": sizes must be positive");
    }
    if (st.dim % st.heads != 0) {
      throw ConfigError("cvt stage " + std::to_string(i) + ": heads must divide the embedding dim");
    }
    // The token embedding must map the input exactly onto a stride-reduced grid.
    for (int extent : {image_height / stride, image_width / stride}) {
      if (extent % st.stride != 0 || (extent + 2 * st.padding - st.patch) / st.stride + 1 != extent / st.stride) {
        throw ConfigError("cvt stage " + std::to_string(i) + ": patch/stride/padding do not tile the input");
      }
    }
    stride *= st.stride;
  }
  if (image_height % stride != 0 || image_width % stride != 0) {
    throw ConfigError("image size is not divisible by the encoder stride");
  }
  for (const auto* cnn : {&sdc_encoder, &rgb_cnn}) {
    if (cnn->stages.empty()) throw ConfigError("cnn encoder needs at least one stage");
    if (cnn->total_stride() != stride) {
      throw ConfigError("cnn encoder stride must match the image encoder stride");
    }
    for (const auto& st : cnn->stages) {
      if (st.channels <= 0 || st.repeats <= 0 || st.expand <= 0 || st.kernel % 2 == 0) {
        throw ConfigError("cnn stage: invalid sizes");
      }
    }
  }
  if (sdc_encoder.in_channels != sdc.num_classes) {
    throw ConfigError("sdc encoder input channels must equal the number of classes");
  }
  if (image_height != sdc.rows || image_width != sdc.merged_cols) {
    throw ConfigError("image size must match the BEV grid so both encoders align");
  }
  if (decoder.num_classes != sdc.num_classes) throw ConfigError("decoder class count mismatch");
  if (fused_dim <= 0 || head_hidden <= 0 || control_hidden <= 0) {
    throw ConfigError("hidden sizes must be positive");
  }
  if (arbitration_beta < 0.0 || arbitration_beta > 1.0) {
    throw ConfigError("arbitration_beta must lie in [0, 1]");
  }
}

namespace {

CnnConfig efficientnet_b1_layout(int in_channels, int width_div, bool full_depth) {
  CnnConfig c;
  c.in_channels = in_channels;
  c.stem_channels = 32 / width_div;
  const MbStageConfig stages[] = {
      {1, 3, 1, 16, 2}, {6, 3, 2, 24, 3}, {6, 5, 2, 40, 3},
      {6, 3, 2, 80, 4}, {6, 5, 1, 112, 4}, {6, 5, 1, 192, 5},
  };
  for (auto st : stages) {
    st.channels = std::max(1, st.channels / width_div);
    if (!full_depth) st.repeats = 1;
    c.stages.push_back(st);
  }
  return c;
}

}  // namespace

ModelConfig ModelConfig::paper() {
  ModelConfig m;
  m.preset = "paper";
  m.cvt.stages = {CvtStageConfig{7, 4, 2, 64, 1, 1, 2, 4}, CvtStageConfig{3, 2, 1, 192, 2, 3, 2, 4},
                  CvtStageConfig{3, 2, 1, 384, 10, 6, 2, 4}};
  m.sdc_encoder = efficientnet_b1_layout(23, 1, true);
  m.rgb_cnn = efficientnet_b1_layout(3, 1, true);
  m.decoder.channels = {128, 64, 32};
  m.fused_dim = 256;
  m.head_hidden = 64;
  m.control_hidden = 64;
  return m;
}

ModelConfig ModelConfig::toy() {
  ModelConfig m;
  m.preset = "toy";
  // Keys and values are pooled to 5 x 24 in every stage to keep attention cheap on CPU.
  m.cvt.stages = {CvtStageConfig{7, 4, 2, 8, 1, 1, 8, 2}, CvtStageConfig{3, 2, 1, 24, 1, 1, 4, 2},
                  CvtStageConfig{3, 2, 1, 48, 1, 2, 2, 2}};
  m.sdc_encoder = efficientnet_b1_layout(23, 8, false);
  m.rgb_cnn = efficientnet_b1_layout(3, 8, false);
  m.decoder.channels = {16, 8, 8};
  m.fused_dim = 32;
  m.head_hidden = 16;
  m.control_hidden = 16;
  return m;
}

ModelConfig ModelConfig::from_preset(const std::string& name) {
  if (name == "paper") return paper();
  if (name == "toy") return toy();
  throw ConfigError("unknown model preset: " + name);
}

namespace {

template <typename T>
void read_opt(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) out = node[key].as<T>();
}

std::string combine_name(control::CombineMode m) {
  return m == control::CombineMode::Mean ? "mean" : "clamp_sum";
}

control::CombineMode combine_from(const std::string& s) {
  if (s == "mean") return control::CombineMode::Mean;
  if (s == "clamp_sum") return control::CombineMode::ClampSum;
  throw ConfigError("unknown combine mode: " + s);
}

}  // namespace

RunConfig parse_run_config(const std::string& yaml_text) {
  RunConfig cfg;
  try {
    const YAML::Node root = YAML::Load(yaml_text);
    const YAML::Node m = root["model"];
    std::string preset = "toy";
    read_opt(m, "preset", preset);
    cfg.model = ModelConfig::from_preset(preset);
    auto& mc = cfg.model;
    read_opt(m, "fused_dim", mc.fused_dim);
    read_opt(m, "head_hidden", mc.head_hidden);
    read_opt(m, "control_hidden", mc.control_hidden);
    read_opt(m, "arbitration_beta", mc.arbitration_beta);
    if (m && m["combine"]) mc.combine = combine_from(m["combine"].as<std::string>());
    if (m && m["cvt_dims"]) {
      const auto dims = m["cvt_dims"].as<std::vector<int>>();
      if (dims.size() != 3) throw ConfigError("cvt_dims needs 3 entries");
      for (int i = 0; i < 3; ++i) mc.cvt.stages[i].dim = dims[i];
    }
    if (m && m["cvt_depths"]) {
      const auto d = m["cvt_depths"].as<std::vector<int>>();
      if (d.size() != 3) throw ConfigError("cvt_depths needs 3 entries");
      for (int i = 0; i < 3; ++i) mc.cvt.stages[i].depth = d[i];
    }
    if (m && m["cvt_heads"]) {
      const auto h = m["cvt_heads"].as<std::vector<int>>();
      if (h.size() != 3) throw ConfigError("cvt_heads needs 3 entries");
      for (int i = 0; i < 3; ++i) mc.cvt.stages[i].heads = h[i];
    }
    if (m && m["cvt_kv_strides"]) {
      const auto k = m["cvt_kv_strides"].as<std::vector<int>>();
      if (k.size() != 3) throw ConfigError("cvt_kv_strides needs 3 entries");
      for (int i = 0; i < 3; ++i) mc.cvt.stages[i].kv_stride = k[i];
    }
    if (m && m["decoder_channels"]) {
      const auto d = m["decoder_channels"].as<std::vector<int>>();
      if (d.size() != 3) throw ConfigError("decoder_channels needs 3 entries");
      for (int i = 0; i < 3; ++i) mc.decoder.channels[i] = d[i];
    }
    read_opt(m, "side_rotation_deg", mc.sdc.side_rotation_deg);
    const YAML::Node ab = m ? m["ablations"] : YAML::Node();
    read_opt(ab, "no_sdc_sides", mc.ablations.no_sdc_sides);
    read_opt(ab, "no_cvt", mc.ablations.no_cvt);
    read_opt(ab, "no_vc", mc.ablations.no_vc);

    const YAML::Node t = root["train"];
    auto& tc = cfg.train;
    read_opt(t, "batch_size", tc.batch_size);
    read_opt(t, "max_epochs", tc.max_epochs);
    read_opt(t, "max_steps", tc.max_steps);
    read_opt(t, "steps_per_epoch", tc.steps_per_epoch);
    read_opt(t, "seed", tc.seed);
    read_opt(t, "weight_decay", tc.weight_decay);
    read_opt(t, "val_fraction", tc.val_fraction);
    read_opt(t, "mgn", tc.mgn);
    read_opt(t, "mgn_gamma", tc.mgn_config.gamma);
    read_opt(t, "mgn_rate", tc.mgn_config.rate);
    read_opt(t, "mgn_max_step", tc.mgn_config.max_step);
    read_opt(t, "mgn_min_weight", tc.mgn_config.min_weight);
    read_opt(t, "lr", tc.schedule.initial_lr);
    read_opt(t, "lr_patience", tc.schedule.patience);
    read_opt(t, "stop_patience", tc.schedule.stop_patience);
    tc.schedule.max_epochs = tc.max_epochs;
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid run config: ") + e.what());
  }
  if (cfg.train.batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (cfg.train.max_epochs <= 0) throw ConfigError("max_epochs must be positive");
  if (cfg.train.val_fraction < 0.0 || cfg.train.val_fraction >= 1.0) {
    throw ConfigError("val_fraction must lie in [0, 1)");
  }
  if (cfg.train.mgn_config.max_step < 1.0 || cfg.train.mgn_config.min_weight < 0.0) {
    throw ConfigError("mgn_max_step must be >= 1 and mgn_min_weight >= 0");
  }
  cfg.model.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_yaml(const RunConfig& cfg) {
  const auto& mc = cfg.model;
  const auto& tc = cfg.train;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "preset" << YAML::Value << mc.preset;
  out << YAML::Key << "fused_dim" << YAML::Value << mc.fused_dim;
  out << YAML::Key << "head_hidden" << YAML::Value << mc.head_hidden;
  out << YAML::Key << "control_hidden" << YAML::Value << mc.control_hidden;
  out << YAML::Key << "arbitration_beta" << YAML::Value << mc.arbitration_beta;
  out << YAML::Key << "combine" << YAML::Value << combine_name(mc.combine);
  std::vector<int> dims, depths, heads, kv;
  for (const auto& st : mc.cvt.stages) {
    dims.push_back(st.dim);
    depths.push_back(st.depth);
    heads.push_back(st.heads);
    kv.push_back(st.kv_stride);
  }
  out << YAML::Key << "cvt_dims" << YAML::Value << YAML::Flow << dims;
  out << YAML::Key << "cvt_depths" << YAML::Value << YAML::Flow << depths;
  out << YAML::Key << "cvt_heads" << YAML::Value << YAML::Flow << heads;
  out << YAML::Key << "cvt_kv_strides" << YAML::Value << YAML::Flow << kv;
  out << YAML::Key << "decoder_channels" << YAML::Value << YAML::Flow
      << std::vector<int>(mc.decoder.channels.begin(), mc.decoder.channels.end());
  out << YAML::Key << "side_rotation_deg" << YAML::Value << mc.sdc.side_rotation_deg;
  out << YAML::Key << "ablations" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "no_sdc_sides" << YAML::Value << mc.ablations.no_sdc_sides;
  out << YAML::Key << "no_cvt" << YAML::Value << mc.ablations.no_cvt;
  out << YAML::Key << "no_vc" << YAML::Value << mc.ablations.no_vc;
  out << YAML::EndMap;
  out << YAML::EndMap;

  out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "batch_size" << YAML::Value << tc.batch_size;
  out << YAML::Key << "max_epochs" << YAML::Value << tc.max_epochs;
  out << YAML::Key << "max_steps" << YAML::Value << tc.max_steps;
  out << YAML::Key << "steps_per_epoch" << YAML::Value << tc.steps_per_epoch;
  out << YAML::Key << "seed" << YAML::Value << tc.seed;
  out << YAML::Key << "weight_decay" << YAML::Value << tc.weight_decay;
  out << YAML::Key << "val_fraction" << YAML::Value << tc.val_fraction;
  out << YAML::Key << "mgn" << YAML::Value << tc.mgn;
  out << YAML::Key << "mgn_gamma" << YAML::Value << tc.mgn_config.gamma;
  out << YAML::Key << "mgn_rate" << YAML::Value << tc.mgn_config.rate;
  out << YAML::Key << "mgn_max_step" << YAML::Value << tc.mgn_config.max_step;
  out << YAML::Key << "mgn_min_weight" << YAML::Value << tc.mgn_config.min_weight;
  out << YAML::Key << "lr" << YAML::Value << tc.schedule.initial_lr;
  out << YAML::Key << "lr_patience" << YAML::Value << tc.schedule.patience;
  out << YAML::Key << "stop_patience" << YAML::Value << tc.schedule.stop_patience;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : to_yaml(cfg)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace fusedrive::model

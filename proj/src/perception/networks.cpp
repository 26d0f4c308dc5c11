#include "fusedrive/perception/networks.hpp"

#include <cmath>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::perception {

namespace F = torch::nn::functional;
using torch::nn::Conv2dOptions;

ConvEmbedImpl::ConvEmbedImpl(int in_channels, const CvtStageConfig& cfg) {
  conv = register_module("conv", torch::nn::Conv2d(Conv2dOptions(in_channels, cfg.dim, cfg.patch)
                                                       .stride(cfg.stride)
                                                       .padding(cfg.padding)));
  norm = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({cfg.dim})));
}

torch::Tensor ConvEmbedImpl::forward(const torch::Tensor& x) {
  auto y = conv->forward(x);
  // Normalize each token over its channels.
  return norm->forward(y.permute({0, 2, 3, 1})).permute({0, 3, 1, 2});
}

ConvProjectionImpl::ConvProjectionImpl(int dim, int stride) {
  depthwise = register_module(
      "depthwise",
      torch::nn::Conv2d(Conv2dOptions(dim, dim, 3).stride(stride).padding(1).groups(dim).bias(false)));
  bn = register_module("bn", torch::nn::BatchNorm2d(dim));
  pointwise = register_module("pointwise", torch::nn::Linear(dim, dim));
}

torch::Tensor ConvProjectionImpl::forward(const torch::Tensor& grid) {
  auto y = bn->forward(depthwise->forward(grid));
  return pointwise->forward(y.flatten(2).transpose(1, 2));
}

ConvAttentionImpl::ConvAttentionImpl(int dim, int heads_, int kv_stride)
    : heads(heads_), scale(1.0 / std::sqrt(static_cast<double>(dim / heads_))) {
  q = register_module("q", ConvProjection(dim, 1));
  k = register_module("k", ConvProjection(dim, kv_stride));
  v = register_module("v", ConvProjection(dim, kv_stride));
  out = register_module("out", torch::nn::Linear(dim, dim));
}

torch::Tensor ConvAttentionImpl::forward(const torch::Tensor& tokens, int h, int w) {
  const auto b = tokens.size(0);
  const auto c = tokens.size(2);
  const auto grid = tokens.transpose(1, 2).reshape({b, c, h, w});
  auto split = [&](const torch::Tensor& t) {
    return t.reshape({b, t.size(1), heads, c / heads}).permute({0, 2, 1, 3});
  };
  const auto qh = split(q->forward(grid));
  const auto kh = split(k->forward(grid));
  const auto vh = split(v->forward(grid));
  const auto attn = torch::softmax(torch::matmul(qh, kh.transpose(-2, -1)) * scale, -1);
  if (keep_attention) last_attention = attn.detach();
  const auto mixed = torch::matmul(attn, vh).permute({0, 2, 1, 3}).reshape({b, -1, c});
  return out->forward(mixed);
}

CvtBlockImpl::CvtBlockImpl(const CvtStageConfig& cfg) {
  norm1 = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({cfg.dim})));
  attn = register_module("attn", ConvAttention(cfg.dim, cfg.heads, cfg.kv_stride));
  norm2 = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({cfg.dim})));
  fc1 = register_module("fc1", torch::nn::Linear(cfg.dim, cfg.dim * cfg.mlp_ratio));
  fc2 = register_module("fc2", torch::nn::Linear(cfg.dim * cfg.mlp_ratio, cfg.dim));
}

torch::Tensor CvtBlockImpl::forward(const torch::Tensor& tokens, int h, int w) {
  auto x = tokens + attn->forward(norm1->forward(tokens), h, w);
  return x + fc2->forward(torch::gelu(fc1->forward(norm2->forward(x))));
}

CvtStageImpl::CvtStageImpl(int in_channels, const CvtStageConfig& cfg) {
  embed = register_module("embed", ConvEmbed(in_channels, cfg));
  for (int i = 0; i < cfg.depth; ++i) {
    blocks.push_back(register_module("block" + std::to_string(i), CvtBlock(cfg)));
  }
}

torch::Tensor CvtStageImpl::forward(const torch::Tensor& x) {
  auto grid = embed->forward(x);
  const auto b = grid.size(0), c = grid.size(1);
  const int h = static_cast<int>(grid.size(2));
  const int w = static_cast<int>(grid.size(3));
  auto tokens = grid.flatten(2).transpose(1, 2);
  for (auto& blk : blocks) tokens = blk->forward(tokens, h, w);
  return tokens.transpose(1, 2).reshape({b, c, h, w});
}

CvtEncoderImpl::CvtEncoderImpl(const CvtConfig& cfg) {
  int in = cfg.in_channels;
  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    stages.push_back(register_module("stage" + std::to_string(i), CvtStage(in, cfg.stages[i])));
    in = cfg.stages[i].dim;
  }
}

EncoderOutput CvtEncoderImpl::forward(const torch::Tensor& rgb) {
  EncoderOutput out;
  auto x = rgb;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    x = stages[i]->forward(x);
    if (i + 1 < stages.size()) out.skips.push_back(x);
  }
  out.features = x;
  return out;
}

namespace {

torch::nn::Sequential conv_bn_act(int in, int out, int kernel, int stride, int groups, bool act) {
  torch::nn::Sequential seq;
  seq->push_back(torch::nn::Conv2d(
      Conv2dOptions(in, out, kernel).stride(stride).padding(kernel / 2).groups(groups).bias(false)));
  seq->push_back(torch::nn::BatchNorm2d(out));
  if (act) seq->push_back(torch::nn::SiLU());
  return seq;
}

}  // namespace

MbConvImpl::MbConvImpl(int in_channels, const MbStageConfig& cfg, int stride, double se_ratio)
    : residual(stride == 1 && in_channels == cfg.channels) {
  const int hidden = in_channels * cfg.expand;
  if (cfg.expand != 1) {
    expand = register_module("expand", conv_bn_act(in_channels, hidden, 1, 1, 1, true));
  }
  depthwise = register_module("depthwise", conv_bn_act(hidden, hidden, cfg.kernel, stride, hidden, true));
  const int squeezed = std::max(1, static_cast<int>(in_channels * se_ratio));
  se_reduce = register_module("se_reduce", torch::nn::Conv2d(Conv2dOptions(hidden, squeezed, 1)));
  se_expand = register_module("se_expand", torch::nn::Conv2d(Conv2dOptions(squeezed, hidden, 1)));
  project = register_module("project", conv_bn_act(hidden, cfg.channels, 1, 1, 1, false));
}

torch::Tensor MbConvImpl::forward(const torch::Tensor& x) {
  auto y = expand.is_empty() ? x : expand->forward(x);
  y = depthwise->forward(y);
  auto s = F::adaptive_avg_pool2d(y, F::AdaptiveAvgPool2dFuncOptions(1));
  s = torch::sigmoid(se_expand->forward(torch::silu(se_reduce->forward(s))));
  y = project->forward(y * s);
  return residual ? x + y : y;
}

CnnEncoderImpl::CnnEncoderImpl(const CnnConfig& cfg) {
  stem = register_module("stem", conv_bn_act(cfg.in_channels, cfg.stem_channels, 3, 2, 1, true));
  int in = cfg.stem_channels;
  int stride = 2;
  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    const auto& st = cfg.stages[i];
    torch::nn::Sequential seq;
    for (int r = 0; r < st.repeats; ++r) {
      seq->push_back(MbConv(in, st, r == 0 ? st.stride : 1, cfg.se_ratio));
      in = st.channels;
    }
    stride *= st.stride;
    stages.push_back(register_module("stage" + std::to_string(i), seq));
    stage_strides.push_back(stride);
  }
}

EncoderOutput CnnEncoderImpl::forward(const torch::Tensor& x) {
  EncoderOutput out;
  auto y = stem->forward(x);
  torch::Tensor at4, at8;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    y = stages[i]->forward(y);
    if (stage_strides[i] == 4) at4 = y;
    if (stage_strides[i] == 8) at8 = y;
  }
  if (at4.defined() && at8.defined()) out.skips = {at4, at8};
  out.features = y;
  return out;
}

std::array<int, 2> cvt_skip_channels(const CvtConfig& cfg) {
  return {cfg.stages[0].dim, cfg.stages[1].dim};
}

std::array<int, 2> cnn_skip_channels(const CnnConfig& cfg) {
  std::array<int, 2> out{0, 0};
  int stride = 2;
  for (const auto& st : cfg.stages) {
    stride *= st.stride;
    if (stride == 4) out[0] = st.channels;
    if (stride == 8) out[1] = st.channels;
  }
  if (out[0] == 0 || out[1] == 0) throw ConfigError("cnn encoder has no stride-4/8 outputs for skips");
  return out;
}

SegDecoderImpl::SegDecoderImpl(int feature_channels, std::array<int, 2> skip_channels,
                               const DecoderConfig& cfg) {
  const auto& ch = cfg.channels;
  conv1 = register_module(
      "conv1", torch::nn::Conv2d(Conv2dOptions(feature_channels + skip_channels[1], ch[0], 3).padding(1)));
  conv2 = register_module(
      "conv2", torch::nn::Conv2d(Conv2dOptions(ch[0] + skip_channels[0], ch[1], 3).padding(1)));
  conv3 = register_module("conv3", torch::nn::Conv2d(Conv2dOptions(ch[1], ch[2], 3).padding(1)));
  classifier = register_module("classifier", torch::nn::Conv2d(Conv2dOptions(ch[2], cfg.num_classes, 1)));
}

torch::Tensor SegDecoderImpl::forward(const torch::Tensor& features, const std::vector<torch::Tensor>& skips,
                                      int out_h, int out_w) {
  if (skips.size() != 2) throw ConfigError("segmentation decoder expects two skip tensors");
  auto up_to = [](const torch::Tensor& t, int64_t h, int64_t w) {
    return F::interpolate(t, F::InterpolateFuncOptions()
                                 .size(std::vector<int64_t>{h, w})
                                 .mode(torch::kBilinear)
                                 .align_corners(false));
  };
  const auto& deep = skips[1];
  const auto& shallow = skips[0];
  if (deep.size(2) != 2 * features.size(2) || shallow.size(2) != 2 * deep.size(2)) {
    throw ConfigError("skip tensors do not match the decoder upsampling factors");
  }
  auto x = up_to(features, deep.size(2), deep.size(3));
  x = torch::gelu(conv1->forward(torch::cat({x, deep}, 1)));
  x = up_to(x, shallow.size(2), shallow.size(3));
  x = torch::gelu(conv2->forward(torch::cat({x, shallow}, 1)));
  // The last 3x3 conv runs at half resolution; only the pointwise classifier
  // sees the full image.
  x = up_to(x, out_h / 2, out_w / 2);
  x = torch::gelu(conv3->forward(x));
  return classifier->forward(up_to(x, out_h, out_w));
}

ProbabilityHeadImpl::ProbabilityHeadImpl(int channels) {
  fc = register_module("fc", torch::nn::Linear(channels, 1));
}

torch::Tensor ProbabilityHeadImpl::forward(const torch::Tensor& features) {
  return torch::sigmoid(fc->forward(features.mean({2, 3})));
}

SpeedHeadImpl::SpeedHeadImpl(int channels, int hidden) {
  fc1 = register_module("fc1", torch::nn::Linear(channels, hidden));
  fc2 = register_module("fc2", torch::nn::Linear(hidden, 1));
}

torch::Tensor SpeedHeadImpl::forward(const torch::Tensor& features) {
  return F::softplus(fc2->forward(torch::relu(fc1->forward(features.mean({2, 3})))));
}

}  // namespace fusedrive::perception

#pragma once

#include <optional>
#include <vector>

#include <torch/torch.h>

#include "fusedrive/model/config.hpp"

namespace fusedrive::perception {

using model::CnnConfig;
using model::CvtConfig;
using model::CvtStageConfig;
using model::DecoderConfig;
using model::MbStageConfig;

// Strided convolution followed by layer normalization over channels.
struct ConvEmbedImpl : torch::nn::Module {
  ConvEmbedImpl(int in_channels, const CvtStageConfig& cfg);
  torch::Tensor forward(const torch::Tensor& x);  // B x C x H x W -> B x dim x H/s x W/s

  torch::nn::Conv2d conv{nullptr};
  torch::nn::LayerNorm norm{nullptr};
};
TORCH_MODULE(ConvEmbed);

// Depth-wise convolution + batch norm, then a point-wise linear map: the
// separable projection producing queries, keys or values from the token grid.
struct ConvProjectionImpl : torch::nn::Module {
  ConvProjectionImpl(int dim, int stride);
  torch::Tensor forward(const torch::Tensor& grid);  // B x C x H x W -> B x N x C

  torch::nn::Conv2d depthwise{nullptr};
  torch::nn::BatchNorm2d bn{nullptr};
  torch::nn::Linear pointwise{nullptr};
};
TORCH_MODULE(ConvProjection);

struct ConvAttentionImpl : torch::nn::Module {
  ConvAttentionImpl(int dim, int heads, int kv_stride);
  // tokens: B x N x C laid out on an h x w grid.
  torch::Tensor forward(const torch::Tensor& tokens, int h, int w);

  int heads;
  double scale;
  bool keep_attention = false;
  torch::Tensor last_attention;  // B x heads x Nq x Nk when keep_attention is set
  ConvProjection q{nullptr}, k{nullptr}, v{nullptr};
  torch::nn::Linear out{nullptr};
};
TORCH_MODULE(ConvAttention);

// Pre-norm transformer block with convolutional attention and an MLP.
struct CvtBlockImpl : torch::nn::Module {
  explicit CvtBlockImpl(const CvtStageConfig& cfg);
  torch::Tensor forward(const torch::Tensor& tokens, int h, int w);

  torch::nn::LayerNorm norm1{nullptr}, norm2{nullptr};
  ConvAttention attn{nullptr};
  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
};
TORCH_MODULE(CvtBlock);

struct CvtStageImpl : torch::nn::Module {
  CvtStageImpl(int in_channels, const CvtStageConfig& cfg);
  torch::Tensor forward(const torch::Tensor& x);  // returns B x dim x H' x W'

  ConvEmbed embed{nullptr};
  std::vector<CvtBlock> blocks;
};
TORCH_MODULE(CvtStage);

struct EncoderOutput {
  torch::Tensor features;            // last stage
  std::vector<torch::Tensor> skips;  // earlier stages, shallowest first
};

struct CvtEncoderImpl : torch::nn::Module {
  explicit CvtEncoderImpl(const CvtConfig& cfg);
  EncoderOutput forward(const torch::Tensor& rgb);

  std::vector<CvtStage> stages;
};
TORCH_MODULE(CvtEncoder);

// Inverted residual block with squeeze-and-excitation.
struct MbConvImpl : torch::nn::Module {
  MbConvImpl(int in_channels, const MbStageConfig& cfg, int stride, double se_ratio);
  torch::Tensor forward(const torch::Tensor& x);

  bool residual;
  torch::nn::Sequential expand{nullptr};
  torch::nn::Sequential depthwise{nullptr};
  torch::nn::Conv2d se_reduce{nullptr}, se_expand{nullptr};
  torch::nn::Sequential project{nullptr};
};
TORCH_MODULE(MbConv);

// EfficientNet-style stack. Skips hold the outputs at strides 4 and 8
// so it can stand in for the transformer encoder.
struct CnnEncoderImpl : torch::nn::Module {
  explicit CnnEncoderImpl(const CnnConfig& cfg);
  EncoderOutput forward(const torch::Tensor& x);

  torch::nn::Sequential stem{nullptr};
  std::vector<torch::nn::Sequential> stages;
  std::vector<int> stage_strides;
};
TORCH_MODULE(CnnEncoder);

// Upsample / concatenate / convolve three times, then a point-wise
// convolution. Returns logits; the model applies the sigmoid.
struct SegDecoderImpl : torch::nn::Module {
  SegDecoderImpl(int feature_channels, std::array<int, 2> skip_channels, const DecoderConfig& cfg);
  torch::Tensor forward(const torch::Tensor& features, const std::vector<torch::Tensor>& skips,
                        int out_h, int out_w);

  torch::nn::Conv2d conv1{nullptr}, conv2{nullptr}, conv3{nullptr}, classifier{nullptr};
};
TORCH_MODULE(SegDecoder);

// Global pool + linear + sigmoid.
struct ProbabilityHeadImpl : torch::nn::Module {
  explicit ProbabilityHeadImpl(int channels);
  torch::Tensor forward(const torch::Tensor& features);  // B x 1 in [0, 1]

  torch::nn::Linear fc{nullptr};
};
TORCH_MODULE(ProbabilityHead);

// Global pool + MLP + softplus, giving a non-negative speed.
struct SpeedHeadImpl : torch::nn::Module {
  SpeedHeadImpl(int channels, int hidden);
  torch::Tensor forward(const torch::Tensor& features);

  torch::nn::Linear fc1{nullptr}, fc2{nullptr};
};
TORCH_MODULE(SpeedHead);

// Channel counts of the two skip tensors produced by an encoder.
std::array<int, 2> cvt_skip_channels(const CvtConfig& cfg);
std::array<int, 2> cnn_skip_channels(const CnnConfig& cfg);

}  // namespace fusedrive::perception

#include "fusedrive/geometry/depth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::geometry {

namespace {

void check_channel(int v) {
  if (v < 0 || v > 255) {
    throw InvalidInput("depth channel value out of [0,255]: " + std::to_string(v));
  }
}

}  // namespace

std::uint32_t depth_code(int r, int g, int b) {
  check_channel(r);
  check_channel(g);
  check_channel(b);
  return static_cast<std::uint32_t>(b) * 65536u + static_cast<std::uint32_t>(g) * 256u +
         static_cast<std::uint32_t>(r);
}

double decode_depth_value(int r, int g, int b) {
  return kMaxDepthMeters * static_cast<double>(depth_code(r, g, b)) / static_cast<double>(kMaxDepthCode);
}

DepthMap decode_depth(const EncodedDepthImage& img) {
  if (img.height <= 0 || img.width <= 0 ||
      img.pixels.size() != static_cast<std::size_t>(img.height) * img.width) {
    throw InvalidInput("decode_depth: image dimensions do not match pixel count");
  }
  DepthMap out(img.height, img.width);
  auto dst = out.data();
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const auto& p = img.pixels[i];
    dst[i] = decode_depth_value(p[0], p[1], p[2]);
  }
  return out;
}

std::array<int, 3> encode_depth_value(double meters) {
  const double clamped = std::clamp(meters, 0.0, kMaxDepthMeters);
  const auto code = static_cast<std::uint32_t>(
      std::llround(clamped / kMaxDepthMeters * static_cast<double>(kMaxDepthCode)));
  return {static_cast<int>(code & 0xFFu), static_cast<int>((code >> 8) & 0xFFu),
          static_cast<int>((code >> 16) & 0xFFu)};
}

EncodedDepthImage encode_depth(const DepthMap& depth) {
  EncodedDepthImage out(depth.rows(), depth.cols());
  auto src = depth.data();
  for (std::size_t i = 0; i < src.size(); ++i) out.pixels[i] = encode_depth_value(src[i]);
  return out;
}

}  // namespace fusedrive::geometry

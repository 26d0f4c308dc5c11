#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fusedrive/common/grid.hpp"

namespace fusedrive::geometry {

// Depth range covered by the 24-bit code, in meters.
inline constexpr double kMaxDepthMeters = 1000.0;
// Largest 24-bit code, 256^3 - 1.
inline constexpr std::uint32_t kMaxDepthCode = 16777215u;

// Depth image as stored on disk: one (R, G, B) triple per pixel.
// Channels are kept as int so that out-of-range values can be reported
// instead of silently wrapping.
struct EncodedDepthImage {
  int height = 0;
  int width = 0;
  std::vector<std::array<int, 3>> pixels;  // row-major, (R, G, B)

  EncodedDepthImage() = default;
  EncodedDepthImage(int h, int w) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w) {}

  std::array<int, 3>& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
  const std::array<int, 3>& at(int r, int c) const {
    return pixels[static_cast<std::size_t>(r) * width + c];
  }
};

// Planar depth in meters, values in [0, 1000].
using DepthMap = Grid2<double>;

std::uint32_t depth_code(int r, int g, int b);
double decode_depth_value(int r, int g, int b);

DepthMap decode_depth(const EncodedDepthImage& img);

// Nearest-code quantization; depths are clamped to [0, 1000] first.
std::array<int, 3> encode_depth_value(double meters);
EncodedDepthImage encode_depth(const DepthMap& depth);

}  // namespace fusedrive::geometry

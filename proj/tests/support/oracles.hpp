#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "fusedrive/geometry/sdc.hpp"

namespace fusedrive::testing {

using geometry::CameraSpec;
using geometry::ClassMap;
using geometry::DepthMap;
using geometry::SdcConfig;
using geometry::SdcGrid;

// The numerator is an exact integer below 2^53, so the single division is
// the correctly rounded value of the closed form.
inline double code_oracle(int r, int g, int b) {
  const auto code = 65536ll * b + 256ll * g + r;
  return static_cast<double>(1000ll * code) / 16777215.0;
}

// Independent per-cell search: every pixel that projects into a cell is a
// candidate, the nearest wins and ties go to the lowest row-major index.
inline SdcGrid camera_oracle(const DepthMap& depth, const ClassMap& cls, const CameraSpec& cam, int grid_cols,
                      const SdcConfig& cfg) {
  const double focal = (cam.image_width / 2.0) / std::tan(cam.horizontal_fov_deg * M_PI / 360.0);
  SdcGrid out(cfg.num_classes, cfg.rows, grid_cols, 0);
  for (int cr = 0; cr < cfg.rows; ++cr) {
    for (int cc = 0; cc < grid_cols; ++cc) {
      double best = std::numeric_limits<double>::infinity();
      int label = -1;
      for (int i = 0; i < depth.rows(); ++i) {
        for (int j = 0; j < depth.cols(); ++j) {
          const double z = depth.at(i, j);
          if (z <= 0.0 || z > cfg.forward_range) continue;
          const double x = (j + 0.5 - cam.image_width / 2.0) * z / focal;
          const double col = grid_cols / 2.0 + x / cfg.lateral_cell;
          if (col < 0.0 || col >= grid_cols) continue;
          int row = static_cast<int>(std::floor(cfg.rows * (1.0 - z / cfg.forward_range)));
          if (row > cfg.rows - 1) row = cfg.rows - 1;
          if (row != cr || static_cast<int>(std::floor(col)) != cc) continue;
          if (z < best) {
            best = z;
            label = cls.at(i, j);
          }
        }
      }
      if (label >= 0) out.at(label, cr, cc) = 1;
    }
  }
  return out;
}

inline int channel_of(const SdcGrid& g, int r, int c) {
  for (int k = 0; k < g.channels(); ++k) {
    if (g.at(k, r, c)) return k;
  }
  return -1;
}

// Merge written from the description: front copied to the middle, then
// every side cell rotated as a complex number about the ego origin and
// dropped into its half unless the target is already taken.
inline SdcGrid merge_oracle(const SdcGrid& front, const SdcGrid& left, const SdcGrid& right, const SdcConfig& cfg) {
  SdcGrid out(cfg.num_classes, cfg.rows, cfg.merged_cols, 0);
  std::vector<bool> taken(static_cast<std::size_t>(cfg.rows) * cfg.merged_cols, false);
  const int off = (cfg.merged_cols - cfg.front_cols) / 2;
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.front_cols; ++c) {
      const int k = channel_of(front, r, c);
      if (k < 0) continue;
      out.at(k, r, c + off) = 1;
      taken[static_cast<std::size_t>(r) * cfg.merged_cols + c + off] = true;
    }
  }
  const double cf = cfg.forward_range / cfg.rows;
  auto splat = [&](const SdcGrid& side, double yaw_deg, int lo, int hi) {
    const std::complex<double> turn = std::polar(1.0, -yaw_deg * M_PI / 180.0);
    for (int r = cfg.rows - 1; r >= 0; --r) {
      for (int c = 0; c < cfg.side_cols; ++c) {
        const int k = channel_of(side, r, c);
        if (k < 0) continue;
        // Real axis = lateral, imaginary axis = forward.
        const std::complex<double> p((c + 0.5 - cfg.side_cols / 2.0) * cfg.lateral_cell, (cfg.rows - r - 0.5) * cf);
        const std::complex<double> q = p * turn;
        const double row = cfg.rows - q.imag() / cf;
        const double col = cfg.merged_cols / 2.0 + q.real() / cfg.lateral_cell;
        if (row < 0.0 || row >= cfg.rows || col < lo || col >= hi) continue;
        const auto idx = static_cast<std::size_t>(std::floor(row)) * cfg.merged_cols + static_cast<std::size_t>(std::floor(col));
        if (taken[idx]) continue;
        taken[idx] = true;
        out.at(k, static_cast<int>(std::floor(row)), static_cast<int>(std::floor(col))) = 1;
      }
    }
  };
  splat(left, -cfg.side_rotation_deg, 0, cfg.merged_cols / 2);
  splat(right, cfg.side_rotation_deg, cfg.merged_cols / 2, cfg.merged_cols);
  return out;
}

}  // namespace fusedrive::testing

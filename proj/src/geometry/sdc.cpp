#include "fusedrive/geometry/sdc.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "fusedrive/common/errors.hpp"
#include "fusedrive/geometry/transform.hpp"

namespace fusedrive::geometry {

void SdcConfig::validate() const {
  if (num_classes <= 0 || rows <= 0 || front_cols <= 0 || side_cols <= 0 || merged_cols <= 0) {
    throw ConfigError("SdcConfig: dimensions must be positive");
  }
  if (front_cols > merged_cols || (merged_cols - front_cols) % 2 != 0) {
    throw ConfigError("SdcConfig: front grid must center inside the merged grid");
  }
  if (side_cols % 2 != 0 || front_cols % 2 != 0 || merged_cols % 2 != 0) {
    throw ConfigError("SdcConfig: column counts must be even");
  }
  if (!(forward_range > 0.0) || !(lateral_cell > 0.0)) {
    throw ConfigError("SdcConfig: cell sizes must be positive");
  }
}

double CameraSpec::focal_px() const {
  return 0.5 * image_width / std::tan(deg_to_rad(horizontal_fov_deg) / 2.0);
}

CameraRig CameraRig::standard(int image_height, int front_width, int side_width,
                              double front_fov_deg) {
  CameraRig rig;
  rig.front = {0.0, front_width, image_height, front_fov_deg};
  const double f = rig.front.focal_px();
  const double side_fov = rad_to_deg(2.0 * std::atan(0.5 * side_width / f));
  rig.left = {-60.0, side_width, image_height, side_fov};
  rig.right = {60.0, side_width, image_height, side_fov};
  return rig;
}

ClassMap argmax_classes(const Grid3<float>& probabilities) {
  ClassMap out(probabilities.rows(), probabilities.cols(), 0);
  for (int r = 0; r < probabilities.rows(); ++r) {
    for (int c = 0; c < probabilities.cols(); ++c) {
      int best = 0;
      float best_p = probabilities.at(0, r, c);
      for (int k = 1; k < probabilities.channels(); ++k) {
        const float p = probabilities.at(k, r, c);
        if (p > best_p) {
          best_p = p;
          best = k;
        }
      }
      out.at(r, c) = best;
    }
  }
  return out;
}

bool project_pixel(int pixel_row, int pixel_col, double depth, const CameraSpec& cam,
                   int grid_cols, const SdcConfig& cfg, int& cell_row, int& cell_col) {
  (void)pixel_row;  // height is not used in the BEV projection
  if (!(depth > 0.0) || depth > cfg.forward_range) return false;
  const double lateral = (pixel_col + 0.5 - 0.5 * cam.image_width) * depth / cam.focal_px();
  const double row_f = cfg.rows * (1.0 - depth / cfg.forward_range);
  const double col_f = 0.5 * grid_cols + lateral / cfg.lateral_cell;
  if (col_f < 0.0 || col_f >= grid_cols) return false;
  cell_row = std::min(cfg.rows - 1, static_cast<int>(std::floor(row_f)));
  cell_col = static_cast<int>(std::floor(col_f));
  return true;
}

SdcGrid build_camera_sdc(const DepthMap& depth, const ClassMap& classes, const CameraSpec& cam,
                         int grid_cols, const SdcConfig& cfg) {
  cfg.validate();
  if (depth.rows() != classes.rows() || depth.cols() != classes.cols()) {
    throw InvalidInput("build_camera_sdc: depth and segmentation shapes differ");
  }
  if (depth.rows() != cam.image_height || depth.cols() != cam.image_width) {
    throw InvalidInput("build_camera_sdc: image shape does not match camera spec");
  }
  if (grid_cols <= 0) throw InvalidInput("build_camera_sdc: grid_cols must be positive");

  const int cells = cfg.rows * grid_cols;
  std::vector<double> nearest(cells, std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> label(cells, -1);

  for (int r = 0; r < depth.rows(); ++r) {
    for (int c = 0; c < depth.cols(); ++c) {
      const double z = depth.at(r, c);
      int cr = 0;
      int cc = 0;
      if (!project_pixel(r, c, z, cam, grid_cols, cfg, cr, cc)) continue;
      const int k = classes.at(r, c);
      if (k < 0 || k >= cfg.num_classes) {
        throw InvalidInput("build_camera_sdc: class index out of range");
      }
      const int idx = cr * grid_cols + cc;
      // Strict comparison keeps the earliest pixel on equal depth.
      if (z < nearest[idx]) {
        nearest[idx] = z;
        label[idx] = k;
      }
    }
  }

  SdcGrid out(cfg.num_classes, cfg.rows, grid_cols, 0);
  for (int idx = 0; idx < cells; ++idx) {
    if (label[idx] >= 0) out.at(label[idx], idx / grid_cols, idx % grid_cols) = 1;
  }
  return out;
}

SdcGrid build_camera_sdc(const DepthMap& depth, const Grid3<float>& probabilities,
                         const CameraSpec& cam, int grid_cols, const SdcConfig& cfg) {
  if (probabilities.channels() != cfg.num_classes) {
    throw InvalidInput("build_camera_sdc: segmentation channel count mismatch");
  }
  if (probabilities.rows() != depth.rows() || probabilities.cols() != depth.cols()) {
    throw InvalidInput("build_camera_sdc: depth and segmentation shapes differ");
  }
  return build_camera_sdc(depth, argmax_classes(probabilities), cam, grid_cols, cfg);
}

namespace {

int set_channel(const SdcGrid& g, int r, int c) {
  for (int k = 0; k < g.channels(); ++k) {
    if (g.at(k, r, c) != 0) return k;
  }
  return -1;
}

void check_grid(const SdcGrid& g, int cols, const SdcConfig& cfg, const char* name) {
  if (g.channels() != cfg.num_classes || g.rows() != cfg.rows || g.cols() != cols) {
    throw InvalidInput(std::string("merge_sdc: wrong shape for ") + name + " grid");
  }
}

// Splat the set cells of a side grid into [col_begin, col_end) of the output.
void splat_side(const SdcGrid& side, double yaw_deg, int col_begin, int col_end,
                const SdcConfig& cfg, SdcGrid& out, std::vector<std::uint8_t>& occupied) {
  const double cf = cfg.cell_forward();
  const double cl = cfg.lateral_cell;
  const double yaw = deg_to_rad(yaw_deg);
  const double cy = std::cos(yaw);
  const double sy = std::sin(yaw);
  const double half_side = 0.5 * cfg.side_cols;
  const double half_merged = 0.5 * cfg.merged_cols;

  for (int r = cfg.rows - 1; r >= 0; --r) {
    for (int c = 0; c < cfg.side_cols; ++c) {
      const int k = set_channel(side, r, c);
      if (k < 0) continue;
      // Cell center in the side camera's BEV frame.
      const double fwd_cam = (cfg.rows - r - 0.5) * cf;
      const double lat_cam = (c + 0.5 - half_side) * cl;
      // Rotate into the ego frame (positive yaw turns forward toward +lateral).
      const double fwd = fwd_cam * cy - lat_cam * sy;
      const double lat = fwd_cam * sy + lat_cam * cy;
      const double row_f = cfg.rows - fwd / cf;
      const double col_f = half_merged + lat / cl;
      if (row_f < 0.0 || row_f >= cfg.rows) continue;
      const int orow = static_cast<int>(std::floor(row_f));
      if (col_f < col_begin || col_f >= col_end) continue;
      const int ocol = static_cast<int>(std::floor(col_f));
      const std::size_t cell = static_cast<std::size_t>(orow) * cfg.merged_cols + ocol;
      if (occupied[cell]) continue;
      occupied[cell] = 1;
      out.at(k, orow, ocol) = 1;
    }
  }
}

}  // namespace

SdcMap merge_sdc(const SdcGrid& front, const SdcGrid& left, const SdcGrid& right,
                 const SdcConfig& cfg) {
  cfg.validate();
  check_grid(front, cfg.front_cols, cfg, "front");
  check_grid(left, cfg.side_cols, cfg, "left");
  check_grid(right, cfg.side_cols, cfg, "right");

  SdcMap map;
  map.cell_forward = cfg.cell_forward();
  map.cell_lateral = cfg.lateral_cell;
  map.grid = SdcGrid(cfg.num_classes, cfg.rows, cfg.merged_cols, 0);
  std::vector<std::uint8_t> occupied(static_cast<std::size_t>(cfg.rows) * cfg.merged_cols, 0);

  const int offset = (cfg.merged_cols - cfg.front_cols) / 2;
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.front_cols; ++c) {
      const int k = set_channel(front, r, c);
      if (k < 0) continue;
      map.grid.at(k, r, c + offset) = 1;
      occupied[static_cast<std::size_t>(r) * cfg.merged_cols + c + offset] = 1;
    }
  }

  const int half = cfg.merged_cols / 2;
  splat_side(left, -cfg.side_rotation_deg, 0, half, cfg, map.grid, occupied);
  splat_side(right, cfg.side_rotation_deg, half, cfg.merged_cols, cfg, map.grid, occupied);
  return map;
}

std::size_t count_set_cells(const SdcGrid& grid) {
  std::size_t n = 0;
  for (int r = 0; r < grid.rows(); ++r) {
    for (int c = 0; c < grid.cols(); ++c) {
      if (set_channel(grid, r, c) >= 0) ++n;
    }
  }
  return n;
}

void write_sdc(const SdcMap& map, const std::string& path) {
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw IoError("write_sdc: cannot open " + path);
  const auto data = map.grid.data();
  bin.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  nlohmann::json meta = {
      {"shape", {map.grid.channels(), map.grid.rows(), map.grid.cols()}},
      {"dtype", "uint8"},
      {"cell_forward", map.cell_forward},
      {"cell_lateral", map.cell_lateral},
  };
  std::ofstream js(path + ".json");
  if (!js) throw IoError("write_sdc: cannot open sidecar for " + path);
  js << meta.dump(2) << '\n';
}

SdcMap read_sdc(const std::string& path) {
  std::ifstream js(path + ".json");
  if (!js) throw IoError("read_sdc: missing sidecar for " + path);
  const auto meta = nlohmann::json::parse(js);
  const auto shape = meta.at("shape").get<std::vector<int>>();
  if (shape.size() != 3) throw IoError("read_sdc: sidecar shape must have 3 entries");
  SdcMap map;
  map.grid = SdcGrid(shape[0], shape[1], shape[2], 0);
  map.cell_forward = meta.at("cell_forward").get<double>();
  map.cell_lateral = meta.at("cell_lateral").get<double>();
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw IoError("read_sdc: cannot open " + path);
  auto data = map.grid.data();
  bin.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (bin.gcount() != static_cast<std::streamsize>(data.size())) {
    throw IoError("read_sdc: truncated tensor file " + path);
  }
  return map;
}

}  // namespace fusedrive::geometry

namespace fusedrive::geometry {

namespace {

template <typename T>
Grid2<T> crop_columns(const Grid2<T>& src, int col0, int width) {
  Grid2<T> out(src.rows(), width);
  for (int r = 0; r < src.rows(); ++r) {
    for (int c = 0; c < width; ++c) out.at(r, c) = src.at(r, col0 + c);
  }
  return out;
}

}  // namespace

SdcMap build_sdc_from_composite(const DepthMap& depth, const ClassMap& classes,
                                const CameraRig& rig, const SdcConfig& cfg, bool use_sides) {
  if (depth.rows() != classes.rows() || depth.cols() != classes.cols()) {
    throw InvalidInput("build_sdc_from_composite: depth and class maps differ in shape");
  }
  if (depth.cols() != rig.composite_width() || depth.rows() != rig.front.image_height) {
    throw InvalidInput("build_sdc_from_composite: composite does not match the camera rig");
  }
  const int wl = rig.left.image_width;
  const int wf = rig.front.image_width;
  const int wr = rig.right.image_width;
  const SdcGrid front = build_camera_sdc(crop_columns(depth, wl, wf), crop_columns(classes, wl, wf),
                                         rig.front, cfg.front_cols, cfg);
  SdcGrid left(cfg.num_classes, cfg.rows, cfg.side_cols, 0);
  SdcGrid right(cfg.num_classes, cfg.rows, cfg.side_cols, 0);
  if (use_sides) {
    left = build_camera_sdc(crop_columns(depth, 0, wl), crop_columns(classes, 0, wl), rig.left,
                            cfg.side_cols, cfg);
    right = build_camera_sdc(crop_columns(depth, wl + wf, wr), crop_columns(classes, wl + wf, wr),
                             rig.right, cfg.side_cols, cfg);
  }
  return merge_sdc(front, left, right, cfg);
}

}  // namespace fusedrive::geometry

#pragma once

#include <cstdint>
#include <string>

#include "fusedrive/common/grid.hpp"
#include "fusedrive/geometry/depth.hpp"

namespace fusedrive::geometry {

inline constexpr int kNumClasses = 23;

// Layout of the bird's-eye-view semantic depth cloud. Rows run from the far
// edge (row 0) to the ego vehicle (bottom). The ego origin sits at the
// bottom-center of every grid. Cells are anisotropic: forward_range / rows
// meters per row, lateral_cell meters per column.
struct SdcConfig {
  int num_classes = kNumClasses;
  int rows = 160;
  int front_cols = 320;
  int side_cols = 224;
  int merged_cols = 768;
  double forward_range = 64.0;
  double lateral_cell = 64.0 / 768.0;
  double side_rotation_deg = 42.0;

  double cell_forward() const { return forward_range / rows; }
  void validate() const;
};

// Pinhole camera mounted on the ego vehicle. yaw_deg is relative to the
// vehicle forward axis, positive to the right (left camera is -60).
struct CameraSpec {
  double yaw_deg = 0.0;
  int image_width = 320;
  int image_height = 160;
  double horizontal_fov_deg = 60.0;

  double focal_px() const;
};

// Default three-camera rig: left (-60), front (0), right (+60). Side cameras
// share the front focal length so the composite has no overlap.
struct CameraRig {
  CameraSpec left;
  CameraSpec front;
  CameraSpec right;

  static CameraRig standard(int image_height = 160, int front_width = 320, int side_width = 224,
                            double front_fov_deg = 60.0);
  int composite_width() const { return left.image_width + front.image_width + right.image_width; }
};

using SdcGrid = Grid3<std::uint8_t>;
using ClassMap = Grid2<std::int32_t>;

// Merged BEV map with its cell scale.
struct SdcMap {
  SdcGrid grid;
  double cell_forward = 0.0;
  double cell_lateral = 0.0;
};

// Per-pixel argmax over the class axis; ties resolve to the lowest class.
ClassMap argmax_classes(const Grid3<float>& probabilities);

// Grid cell hit by a pixel of `cam` at planar depth z, or false when the
// point falls outside (0, forward_range] or the lateral bounds of a grid
// with `grid_cols` columns.
bool project_pixel(int pixel_row, int pixel_col, double depth, const CameraSpec& cam,
                   int grid_cols, const SdcConfig& cfg, int& cell_row, int& cell_col);

// Project one camera's labelled depth into its own BEV grid
// (num_classes x rows x grid_cols). Height is discarded. When several
// pixels land in the same cell the nearest one wins, then the lowest
// row-major pixel index.
SdcGrid build_camera_sdc(const DepthMap& depth, const ClassMap& classes, const CameraSpec& cam,
                         int grid_cols, const SdcConfig& cfg);
SdcGrid build_camera_sdc(const DepthMap& depth, const Grid3<float>& probabilities,
                         const CameraSpec& cam, int grid_cols, const SdcConfig& cfg);

// Merge the three per-camera grids into the num_classes x rows x merged_cols
// map. Front goes to the central columns unrotated. Each set side cell is
// rotated about the ego origin by -/+side_rotation_deg (left/right) and
// splatted to the nearest output cell of its own half. Front cells take
// priority, then the first side cell written (nearest row first, then
// lowest column).
SdcMap merge_sdc(const SdcGrid& front, const SdcGrid& left, const SdcGrid& right,
                 const SdcConfig& cfg);

// Number of set cells (cells with any channel on).
std::size_t count_set_cells(const SdcGrid& grid);

// Raw dump: channels*rows*cols bytes plus `<path>.json` with shape and cell sizes.
void write_sdc(const SdcMap& map, const std::string& path);
SdcMap read_sdc(const std::string& path);

}  // namespace fusedrive::geometry

namespace fusedrive::geometry {

// Split a left | front | right composite into its cameras and build the
// merged map. `use_sides = false` leaves the side contributions empty.
SdcMap build_sdc_from_composite(const DepthMap& depth, const ClassMap& classes,
                                const CameraRig& rig, const SdcConfig& cfg, bool use_sides = true);

}  // namespace fusedrive::geometry

#pragma once

#include "fusedrive/common/image.hpp"
#include "fusedrive/evaluation/closed_loop.hpp"
#include "fusedrive/evaluation/scene.hpp"
#include "fusedrive/evaluation/simulator.hpp"
#include "fusedrive/geometry/depth.hpp"
#include "fusedrive/geometry/sdc.hpp"

namespace fusedrive::training {

struct RenderConfig {
  geometry::CameraRig rig = geometry::CameraRig::standard();
  double camera_height = 1.5;
  double road_line_half_width = 0.12;
};

// Exact per-pixel outputs of the ray caster for the left | front | right
// composite.
struct RenderedView {
  Image8 rgb;
  geometry::DepthMap depth;  // planar depth in meters
  geometry::ClassMap seg;
};

// Ray-cast the flat-shaded toy world (ground, sky, buildings, NPCs,
// signals) from the ego pose. Depth is measured along each camera's axis.
RenderedView render_view(const evaluation::Scene& scene, const evaluation::SimState& state,
                         const RenderConfig& cfg = {});

// Sensor frame as a sensor-driven agent receives it (depth 24-bit encoded).
evaluation::SensorFrame render_sensors(const evaluation::Scene& scene,
                                       const evaluation::SimState& state,
                                       const RenderConfig& cfg = {});

evaluation::SensorRenderer make_sensor_renderer(RenderConfig cfg = {});

}  // namespace fusedrive::training

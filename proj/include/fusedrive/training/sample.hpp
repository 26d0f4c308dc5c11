#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusedrive/common/image.hpp"
#include "fusedrive/control/types.hpp"
#include "fusedrive/geometry/depth.hpp"
#include "fusedrive/geometry/sdc.hpp"
#include "fusedrive/geometry/transform.hpp"

namespace fusedrive::training {

// Continuous control labels: steering in [-1, 1], throttle in [0, 0.75],
// brake in {0, 1}.
struct ControlLabel {
  double steering = 0.0;
  double throttle = 0.0;
  double brake = 0.0;
};

// One training example. Images are the left | front | right composite.
struct Sample {
  Image8 rgb;
  geometry::EncodedDepthImage depth;
  geometry::ClassMap seg;
  control::WaypointSet waypoints;
  ControlLabel controls;
  double traffic_light = 0.0;
  double stop_sign = 0.0;
  double speed = 0.0;
  control::Command command = control::Command::Follow;
  geometry::Vec2 route_point;
  geometry::VehiclePose pose;
  std::string scenario;
  std::uint64_t seed = 0;

  control::MeasurementVector measurement() const { return {speed, command, route_point}; }
};

// Dataset layout: one directory per sample holding rgb.png, depth.png,
// seg.png and meta.json.
void write_sample(const Sample& sample, const std::string& dir);
Sample read_sample(const std::string& dir);
// Sample directories under `root`, sorted by name. Throws IoError when the
// root is missing or holds no samples.
std::vector<std::string> list_samples(const std::string& root);

}  // namespace fusedrive::training

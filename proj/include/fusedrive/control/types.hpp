#pragma once

#include <array>
#include <string>

#include "fusedrive/geometry/transform.hpp"

namespace fusedrive::control {

using geometry::Vec2;

// Denormalized vehicle command: steering in [-1, 1] (negative = left),
// throttle in [0, 0.75], brake in {0, 1}.
struct ControlCommand {
  double steering = 0.0;
  double throttle = 0.0;
  int brake = 0;

  bool in_range() const;
  bool operator==(const ControlCommand&) const = default;
};

inline constexpr double kMaxThrottle = 0.75;
inline constexpr int kNumWaypoints = 3;

// Future positions in the ego BEV frame (meters), excluding the implicit
// origin waypoint.
struct WaypointSet {
  std::array<Vec2, kNumWaypoints> points{};
};

// High-level navigation command, one-hot encoded in the measurement vector.
enum class Command { Left = 0, Right = 1, Straight = 2, Follow = 3, Stop = 4, Other = 5 };
inline constexpr int kNumCommands = 6;

std::string to_string(Command c);
Command command_from_string(const std::string& s);

// speed, 6-way one-hot command, route point (x, y).
inline constexpr int kMeasurementDim = 1 + kNumCommands + 2;

struct MeasurementVector {
  double speed = 0.0;
  Command command = Command::Follow;
  Vec2 route_point_local;

  std::array<float, kMeasurementDim> to_array() const;
};

}  // namespace fusedrive::control

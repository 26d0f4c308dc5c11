#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fusedrive/evaluation/route.hpp"

namespace fusedrive::evaluation {

// Semantic class ids, following the usual 23-class driving-simulator layout.
namespace classes {
inline constexpr int kUnlabeled = 0;
inline constexpr int kBuilding = 1;
inline constexpr int kFence = 2;
inline constexpr int kOther = 3;
inline constexpr int kPedestrian = 4;
inline constexpr int kPole = 5;
inline constexpr int kRoadLine = 6;
inline constexpr int kRoad = 7;
inline constexpr int kSidewalk = 8;
inline constexpr int kVegetation = 9;
inline constexpr int kVehicle = 10;
inline constexpr int kWall = 11;
inline constexpr int kTrafficSign = 12;
inline constexpr int kSky = 13;
inline constexpr int kGround = 14;
inline constexpr int kBridge = 15;
inline constexpr int kRailTrack = 16;
inline constexpr int kGuardRail = 17;
inline constexpr int kTrafficLight = 18;
inline constexpr int kStatic = 19;
inline constexpr int kDynamic = 20;
inline constexpr int kWater = 21;
inline constexpr int kTerrain = 22;
}  // namespace classes

using Color = std::array<std::uint8_t, 3>;

// Vertical prism with an oriented rectangular footprint.
struct Box {
  Vec2 center;
  double heading_deg = 0.0;
  double length = 1.0;  // along heading
  double width = 1.0;
  double z_min = 0.0;
  double z_max = 1.0;
  int class_id = classes::kStatic;
  Color color{128, 128, 128};
};

enum class NpcKind { Pedestrian, Vehicle };

struct Npc {
  int id = 0;
  NpcKind kind = NpcKind::Vehicle;
  Vec2 position;
  Vec2 velocity;
  double heading_deg = 0.0;
  double length = 4.5;
  double width = 1.9;
  double height = 1.5;
  bool active = true;
  Color color{40, 60, 200};

  Box box() const;
  double radius() const;
};

struct TrafficLight {
  double s = 0.0;  // stop line arc length
  Vec2 pole;       // pole base, to the right of the lane
  double red_from = 0.0;
  double red_until = 1e9;

  bool is_red(double time) const { return time >= red_from && time < red_until; }
};

struct StopSign {
  double s = 0.0;
  Vec2 pole;
};

// Lateral layout of the road relative to the route (the ego lane center).
struct RoadLayout {
  double lane_half_width = 1.75;
  double left_edge = -5.25;  // opposing lane extends to the left
  double right_edge = 1.75;
  double sidewalk_width = 2.0;
};

// Static world around a route: road, buildings, signals.
struct Scene {
  Route route;
  RoadLayout road;
  std::vector<Box> statics;
  std::vector<TrafficLight> lights;
  std::vector<StopSign> stop_signs;
  Color building_tint{150, 140, 130};
};

// Place buildings along both sides of the route and materialize the
// signal triggers. Deterministic for a given seed.
Scene make_scene(const Route& route, std::uint64_t seed);

// Renderable boxes for a light (pole plus head colored by its state).
std::vector<Box> light_boxes(const TrafficLight& light, double time, double route_heading_deg);
std::vector<Box> stop_sign_boxes(const StopSign& sign, double route_heading_deg);

}  // namespace fusedrive::evaluation

#include "fusedrive/evaluation/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fusedrive/geometry/transform.hpp"

namespace fusedrive::evaluation {

using geometry::deg_to_rad;

Box Npc::box() const {
  Box b;
  b.center = position;
  b.heading_deg = heading_deg;
  b.length = length;
  b.width = width;
  b.z_min = 0.0;
  b.z_max = height;
  b.class_id = kind == NpcKind::Pedestrian ? classes::kPedestrian : classes::kVehicle;
  b.color = color;
  return b;
}

double Npc::radius() const { return 0.5 * std::max(length, width); }

namespace {

Vec2 offset_right(Vec2 p, double heading_deg, double d) {
  const double h = deg_to_rad(heading_deg);
  return {p.x - d * std::sin(h), p.y + d * std::cos(h)};
}

}  // namespace

Scene make_scene(const Route& route, std::uint64_t seed) {
  Scene scene;
  scene.route = route;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap(4.0, 9.0);
  std::uniform_real_distribution<double> depth(6.0, 12.0);
  std::uniform_real_distribution<double> height(5.0, 14.0);
  std::uniform_real_distribution<double> setback(1.0, 4.0);
  std::uniform_int_distribution<int> shade(-25, 25);

  const auto tint = [&](Color c) {
    const int d = shade(rng);
    for (auto& ch : c) ch = static_cast<std::uint8_t>(std::clamp(int(ch) + d, 0, 255));
    return c;
  };

  // Buildings on both sides, outside the sidewalks.
  for (int side = 0; side < 2; ++side) {
    const double base = side == 0 ? scene.road.right_edge + scene.road.sidewalk_width
                                   : scene.road.left_edge - scene.road.sidewalk_width;
    double s = -10.0;
    while (s < route.length() + 60.0) {
      const double len = 6.0 + gap(rng);
      const double dep = depth(rng);
      const double off = side == 0 ? base + setback(rng) + 0.5 * dep : base - setback(rng) - 0.5 * dep;
      const double sc = std::clamp(s + 0.5 * len, 0.0, route.length());
      double heading = route.heading_at(sc);
      Vec2 anchor = route.point_at(sc);
      if (s + 0.5 * len > route.length()) {
        // Extend past the end along the final heading.
        const double h = deg_to_rad(heading);
        const double extra = s + 0.5 * len - route.length();
        anchor = {anchor.x + extra * std::cos(h), anchor.y + extra * std::sin(h)};
      } else if (s + 0.5 * len < 0.0) {
        const double h = deg_to_rad(heading);
        const double extra = s + 0.5 * len;
        anchor = {anchor.x + extra * std::cos(h), anchor.y + extra * std::sin(h)};
      }
      Box b;
      b.center = offset_right(anchor, heading, off);
      b.heading_deg = heading;
      b.length = len;
      b.width = dep;
      b.z_min = 0.0;
      b.z_max = height(rng);
      b.class_id = classes::kBuilding;
      b.color = tint(scene.building_tint);
      // Skip buildings that would intrude on the road around bends.
      const auto proj = route.project(b.center);
      if (std::abs(proj.lateral) - 0.5 * std::hypot(b.length, b.width) >
          std::max(std::abs(scene.road.left_edge), scene.road.right_edge)) {
        scene.statics.push_back(b);
      }
      s += len + gap(rng);
    }
  }

  for (const auto& t : route.triggers()) {
    const double s = route.trigger_s(t);
    const double heading = route.heading_at(s);
    const Vec2 at = route.point_at(s);
    if (t.type == TriggerType::RedLight) {
      scene.lights.push_back({s, offset_right(at, heading, scene.road.right_edge + 0.8), t.red_from,
                              t.red_until});
    } else if (t.type == TriggerType::StopSign) {
      scene.stop_signs.push_back({s, offset_right(at, heading, scene.road.right_edge + 0.8)});
    }
  }
  return scene;
}

std::vector<Box> light_boxes(const TrafficLight& light, double time, double route_heading_deg) {
  Box pole;
  pole.center = light.pole;
  pole.heading_deg = route_heading_deg;
  pole.length = 0.25;
  pole.width = 0.25;
  pole.z_min = 0.0;
  pole.z_max = 3.2;
  pole.class_id = classes::kPole;
  pole.color = {90, 90, 90};
  Box head = pole;
  head.length = 0.4;
  head.width = 0.5;
  head.z_min = 3.2;
  head.z_max = 4.2;
  head.class_id = classes::kTrafficLight;
  head.color = light.is_red(time) ? Color{230, 20, 20} : Color{20, 220, 40};
  return {pole, head};
}

std::vector<Box> stop_sign_boxes(const StopSign& sign, double route_heading_deg) {
  Box pole;
  pole.center = sign.pole;
  pole.heading_deg = route_heading_deg;
  pole.length = 0.12;
  pole.width = 0.12;
  pole.z_min = 0.0;
  pole.z_max = 2.0;
  pole.class_id = classes::kPole;
  pole.color = {90, 90, 90};
  Box plate = pole;
  plate.length = 0.1;
  plate.width = 0.8;
  plate.z_min = 2.0;
  plate.z_max = 2.8;
  plate.class_id = classes::kTrafficSign;
  plate.color = {200, 30, 60};
  return {pole, plate};
}

}  // namespace fusedrive::evaluation

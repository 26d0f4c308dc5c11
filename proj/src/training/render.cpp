#include "fusedrive/training/render.hpp"

#include <cmath>
#include <limits>

namespace fusedrive::training {

using evaluation::Box;
using evaluation::Color;
using geometry::Vec2;
namespace classes = evaluation::classes;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Ray {
  double ox, oy, oz;  // origin, z up
  double dx, dy, dz;  // direction scaled so that the camera-axis component is 1
};

struct Hit {
  double t = kInf;
  int class_id = classes::kSky;
  Color color{130, 180, 235};
};

// Slab test against a vertical prism; shades by the face that was entered.
void intersect_box(const Ray& ray, const Box& b, Hit& hit) {
  const double h = geometry::deg_to_rad(b.heading_deg);
  const double c = std::cos(h);
  const double s = std::sin(h);
  const double rx = ray.ox - b.center.x;
  const double ry = ray.oy - b.center.y;
  const double ou = rx * c + ry * s;
  const double ov = -rx * s + ry * c;
  const double du = ray.dx * c + ray.dy * s;
  const double dv = -ray.dx * s + ray.dy * c;

  double t0 = 0.0;
  double t1 = hit.t;
  int face = -1;
  auto slab = [&](double o, double d, double lo, double hi, int axis) {
    if (std::abs(d) < 1e-12) return o >= lo && o <= hi;
    double ta = (lo - o) / d;
    double tb = (hi - o) / d;
    if (ta > tb) std::swap(ta, tb);
    if (ta > t0) {
      t0 = ta;
      face = axis;
    }
    t1 = std::min(t1, tb);
    return t0 <= t1;
  };
  if (!slab(ou, du, -0.5 * b.length, 0.5 * b.length, 0)) return;
  if (!slab(ov, dv, -0.5 * b.width, 0.5 * b.width, 1)) return;
  if (!slab(ray.oz, ray.dz, b.z_min, b.z_max, 2)) return;
  if (face < 0 || t0 <= 0.0 || t0 >= hit.t) return;

  const double shade = face == 0 ? 1.0 : face == 1 ? 0.8 : 0.9;
  hit.t = t0;
  hit.class_id = b.class_id;
  for (int k = 0; k < 3; ++k) hit.color[k] = static_cast<std::uint8_t>(std::lround(b.color[k] * shade));
}

void intersect_ground(const Ray& ray, const evaluation::Scene& scene, const RenderConfig& cfg,
                      Hit& hit) {
  if (ray.dz >= 0.0) return;
  const double t = -ray.oz / ray.dz;
  if (t <= 0.0 || t >= hit.t || t > geometry::kMaxDepthMeters) return;
  const Vec2 p{ray.ox + t * ray.dx, ray.oy + t * ray.dy};
  const auto proj = scene.route.project(p);
  const double lat = proj.lateral;
  const auto& road = scene.road;
  hit.t = t;
  const double centre_line = road.right_edge - 2.0 * road.lane_half_width;
  if (std::abs(lat - centre_line) < cfg.road_line_half_width ||
      std::abs(lat - road.right_edge) < cfg.road_line_half_width) {
    hit.class_id = classes::kRoadLine;
    hit.color = {235, 235, 225};
  } else if (lat >= road.left_edge && lat <= road.right_edge) {
    hit.class_id = classes::kRoad;
    hit.color = {85, 85, 90};
  } else if (lat >= road.left_edge - road.sidewalk_width &&
             lat <= road.right_edge + road.sidewalk_width) {
    hit.class_id = classes::kSidewalk;
    hit.color = {175, 170, 165};
  } else {
    hit.class_id = classes::kTerrain;
    hit.color = {95, 140, 65};
  }
}

std::vector<Box> world_boxes(const evaluation::Scene& scene, const evaluation::SimState& state) {
  std::vector<Box> boxes = scene.statics;
  for (const auto& npc : state.npcs) {
    if (npc.active) boxes.push_back(npc.box());
  }
  for (const auto& light : scene.lights) {
    for (auto& b : evaluation::light_boxes(light, state.time, scene.route.heading_at(light.s))) {
      boxes.push_back(b);
    }
  }
  for (const auto& sign : scene.stop_signs) {
    for (auto& b : evaluation::stop_sign_boxes(sign, scene.route.heading_at(sign.s))) {
      boxes.push_back(b);
    }
  }
  return boxes;
}

}  // namespace

RenderedView render_view(const evaluation::Scene& scene, const evaluation::SimState& state,
                         const RenderConfig& cfg) {
  const auto& rig = cfg.rig;
  const int height = rig.front.image_height;
  const int width = rig.composite_width();
  RenderedView view{Image8(height, width, 3), geometry::DepthMap(height, width),
                    geometry::ClassMap(height, width)};
  const auto boxes = world_boxes(scene, state);

  const geometry::CameraSpec* cams[3] = {&rig.left, &rig.front, &rig.right};
  int col0 = 0;
  for (const auto* cam : cams) {
    const double f = cam->focal_px();
    const double yaw = geometry::deg_to_rad(state.pose.heading_deg + cam->yaw_deg);
    // Left-handed ground frame: heading grows clockwise, right = heading + 90.
    const double fx = std::cos(yaw), fy = std::sin(yaw);
    const double rx = -fy, ry = fx;
    for (int v = 0; v < cam->image_height; ++v) {
      const double yc = (v + 0.5 - 0.5 * cam->image_height) / f;
      for (int u = 0; u < cam->image_width; ++u) {
        const double xc = (u + 0.5 - 0.5 * cam->image_width) / f;
        const Ray ray{state.pose.x, state.pose.y, cfg.camera_height,
                      fx + xc * rx, fy + xc * ry, -yc};
        Hit hit;
        for (const auto& b : boxes) intersect_box(ray, b, hit);
        intersect_ground(ray, scene, cfg, hit);
        const int col = col0 + u;
        view.depth.at(v, col) = std::isfinite(hit.t) ? std::min(hit.t, geometry::kMaxDepthMeters)
                                                     : geometry::kMaxDepthMeters;
        view.seg.at(v, col) = hit.class_id;
        for (int k = 0; k < 3; ++k) view.rgb.at(v, col, k) = hit.color[k];
      }
    }
    col0 += cam->image_width;
  }
  return view;
}

evaluation::SensorFrame render_sensors(const evaluation::Scene& scene,
                                       const evaluation::SimState& state, const RenderConfig& cfg) {
  RenderedView view = render_view(scene, state, cfg);
  return {std::move(view.rgb), geometry::encode_depth(view.depth)};
}

evaluation::SensorRenderer make_sensor_renderer(RenderConfig cfg) {
  return [cfg](const evaluation::Scene& scene, const evaluation::SimState& state) {
    return render_sensors(scene, state, cfg);
  };
}

}  // namespace fusedrive::training

#include "fusedrive/geometry/transform.hpp"

#include <cmath>
#include <numbers>

namespace fusedrive::geometry {

namespace {

// sin/cos of an angle in degrees, exact at multiples of 90 degrees.
void sincos_deg(double deg, double& s, double& c) {
  const double a = normalize_angle_deg(deg);
  if (a == 0.0) {
    s = 0.0;
    c = 1.0;
  } else if (a == 90.0) {
    s = 1.0;
    c = 0.0;
  } else if (a == 180.0) {
    s = 0.0;
    c = -1.0;
  } else if (a == -90.0) {
    s = -1.0;
    c = 0.0;
  } else {
    const double r = deg_to_rad(a);
    s = std::sin(r);
    c = std::cos(r);
  }
}

}  // namespace

double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double distance(Vec2 a, Vec2 b) { return norm(a - b); }

double normalize_angle_deg(double deg) {
  double a = std::fmod(deg, 360.0);
  if (a <= -180.0) a += 360.0;
  if (a > 180.0) a -= 360.0;
  return a;
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

Vec2 global_to_local(Vec2 p_global, const VehiclePose& pose) {
  double s = 0.0;
  double c = 1.0;
  sincos_deg(90.0 + pose.heading_deg, s, c);
  const double dx = p_global.x - pose.x;
  const double dy = p_global.y - pose.y;
  // Transposed rotation.
  return {c * dx + s * dy, -s * dx + c * dy};
}

Vec2 local_to_global(Vec2 p_local, const VehiclePose& pose) {
  double s = 0.0;
  double c = 1.0;
  sincos_deg(90.0 + pose.heading_deg, s, c);
  return {c * p_local.x - s * p_local.y + pose.x, s * p_local.x + c * p_local.y + pose.y};
}

Vec2 heading_vector(const VehiclePose& pose) {
  double s = 0.0;
  double c = 1.0;
  sincos_deg(pose.heading_deg, s, c);
  return {c, s};
}

Vec2 right_vector(const VehiclePose& pose) {
  double s = 0.0;
  double c = 1.0;
  sincos_deg(pose.heading_deg, s, c);
  return {-s, c};
}

}  // namespace fusedrive::geometry

#pragma once

namespace fusedrive::geometry {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
double norm(Vec2 v);
double distance(Vec2 a, Vec2 b);

// Ego pose in the global frame. The global frame is left-handed (x forward
// at heading 0, y to the right) and heading grows clockwise, so a positive
// steering command increases heading_deg.
struct VehiclePose {
  double x = 0.0;
  double y = 0.0;
  double heading_deg = 0.0;  // (-180, 180]
};

double normalize_angle_deg(double deg);
double deg_to_rad(double deg);
double rad_to_deg(double rad);

// Global point -> ego-local BEV frame, x_l to the right, y_l backward (so
// points ahead of the vehicle have negative y_l).
// (x_l, y_l) = R(90 deg + heading)^T (p - p_vehicle).
Vec2 global_to_local(Vec2 p_global, const VehiclePose& pose);
Vec2 local_to_global(Vec2 p_local, const VehiclePose& pose);

// Heading direction and right-hand normal of a pose in the global frame.
Vec2 heading_vector(const VehiclePose& pose);
Vec2 right_vector(const VehiclePose& pose);

}  // namespace fusedrive::geometry

#pragma once

#include <span>
#include <string>
#include <vector>

#include "fusedrive/control/types.hpp"
#include "fusedrive/geometry/transform.hpp"

namespace fusedrive::evaluation {

using geometry::Vec2;

enum class TriggerType {
  PedestrianCrossing,  // adversarial: a pedestrian steps into the lane
  VehicleCrossing,     // adversarial: a vehicle cuts across the lane
  RedLight,            // signal at the trigger, red within [red_from, red_until)
  StopSign,
  Intersection,        // reduced target speed over `extent` meters
};

std::string to_string(TriggerType t);
TriggerType trigger_from_string(const std::string& s);

struct Trigger {
  TriggerType type = TriggerType::Intersection;
  Vec2 position;
  double red_from = 0.0;
  double red_until = 1e9;
  double extent = 20.0;
};

// Ordered polyline in the global frame plus scenario triggers.
class Route {
 public:
  struct Projection {
    double s = 0.0;        // arc length of the closest point
    double lateral = 0.0;  // signed offset, positive to the right of travel
    Vec2 point;
    double heading_deg = 0.0;
  };

  Route() = default;
  Route(std::string name, std::vector<Vec2> waypoints, std::vector<Trigger> triggers = {});

  const std::string& name() const { return name_; }
  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  const std::vector<Trigger>& triggers() const { return triggers_; }
  double length() const { return cumulative_.back(); }

  Projection project(Vec2 p) const;
  Vec2 point_at(double s) const;
  double heading_at(double s) const;
  double trigger_s(const Trigger& t) const { return project(t.position).s; }

  // Sparse goals every `spacing` meters plus the final point.
  std::vector<double> goal_arclengths(double spacing) const;

 private:
  std::string name_;
  std::vector<Vec2> waypoints_;
  std::vector<Trigger> triggers_;
  std::vector<double> cumulative_;
};

Route make_straight_route(double length, std::string name = "straight");
// Straight lead-in, circular turn of `turn_deg` (positive = right) with the
// given radius, straight exit.
Route make_turn_route(double lead_in, double radius, double turn_deg, double exit_length,
                      std::string name = "turn");

Route load_route(const std::string& path);
void save_route(const Route& route, const std::string& path);

// Navigation command implied by the route shape ahead of arc length s.
control::Command command_at(const Route& route, double s, double horizon = 15.0);

// Fraction of the route driven correctly: forward progress accumulated only
// while consecutive path samples stay within `corridor_half_width` of the
// route, divided by the route length and capped at 1.
double route_completion(std::span<const Vec2> driven_path, const Route& route,
                        double corridor_half_width = 1.75);

}  // namespace fusedrive::evaluation

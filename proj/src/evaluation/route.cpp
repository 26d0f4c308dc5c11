#include "fusedrive/evaluation/route.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::evaluation {

using geometry::deg_to_rad;
using geometry::distance;
using geometry::rad_to_deg;

std::string to_string(TriggerType t) {
  switch (t) {
    case TriggerType::PedestrianCrossing: return "pedestrian_crossing";
    case TriggerType::VehicleCrossing: return "vehicle_crossing";
    case TriggerType::RedLight: return "red_light";
    case TriggerType::StopSign: return "stop_sign";
    case TriggerType::Intersection: return "intersection";
  }
  return "intersection";
}

TriggerType trigger_from_string(const std::string& s) {
  for (auto t : {TriggerType::PedestrianCrossing, TriggerType::VehicleCrossing,
                 TriggerType::RedLight, TriggerType::StopSign, TriggerType::Intersection}) {
    if (to_string(t) == s) return t;
  }
  throw ConfigError("unknown trigger type: " + s);
}

Route::Route(std::string name, std::vector<Vec2> waypoints, std::vector<Trigger> triggers)
    : name_(std::move(name)), waypoints_(std::move(waypoints)), triggers_(std::move(triggers)) {
  if (waypoints_.size() < 2) throw InvalidInput("Route: need at least two waypoints");
  cumulative_.assign(waypoints_.size(), 0.0);
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    const double d = distance(waypoints_[i], waypoints_[i - 1]);
    if (!(d > 0.0)) throw InvalidInput("Route: consecutive waypoints must be distinct");
    cumulative_[i] = cumulative_[i - 1] + d;
  }
}

Route::Projection Route::project(Vec2 p) const {
  Projection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i) {
    const Vec2 a = waypoints_[i];
    const Vec2 ab = waypoints_[i + 1] - a;
    const double len2 = ab.x * ab.x + ab.y * ab.y;
    double t = ((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q{a.x + t * ab.x, a.y + t * ab.y};
    const double d2 = (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
    if (d2 < best_d2) {
      best_d2 = d2;
      const double len = std::sqrt(len2);
      best.s = cumulative_[i] + t * len;
      best.point = q;
      // Right-hand normal of the segment direction in the left-handed frame.
      const Vec2 right{-ab.y / len, ab.x / len};
      best.lateral = (p.x - q.x) * right.x + (p.y - q.y) * right.y;
      best.heading_deg = rad_to_deg(std::atan2(ab.y, ab.x));
    }
  }
  return best;
}

Vec2 Route::point_at(double s) const {
  if (s <= 0.0) return waypoints_.front();
  if (s >= length()) return waypoints_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  const double t = (s - cumulative_[i]) / (cumulative_[i + 1] - cumulative_[i]);
  const Vec2 a = waypoints_[i];
  const Vec2 b = waypoints_[i + 1];
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

double Route::heading_at(double s) const {
  s = std::clamp(s, 0.0, length());
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
  i = std::clamp<std::size_t>(i, 1, waypoints_.size() - 1) - 1;
  const Vec2 d = waypoints_[i + 1] - waypoints_[i];
  return rad_to_deg(std::atan2(d.y, d.x));
}

std::vector<double> Route::goal_arclengths(double spacing) const {
  if (!(spacing > 0.0)) throw InvalidInput("goal spacing must be positive");
  std::vector<double> goals;
  for (double s = spacing; s < length(); s += spacing) goals.push_back(s);
  goals.push_back(length());
  return goals;
}

Route make_straight_route(double length, std::string name) {
  if (!(length > 0.0)) throw InvalidInput("make_straight_route: length must be positive");
  std::vector<Vec2> pts;
  const int n = std::max(1, static_cast<int>(std::ceil(length / 5.0)));
  for (int i = 0; i <= n; ++i) pts.push_back({length * i / n, 0.0});
  return Route(std::move(name), std::move(pts));
}

Route make_turn_route(double lead_in, double radius, double turn_deg, double exit_length,
                      std::string name) {
  std::vector<Vec2> pts;
  const int n_in = std::max(1, static_cast<int>(std::ceil(lead_in / 5.0)));
  for (int i = 0; i <= n_in; ++i) pts.push_back({lead_in * i / n_in, 0.0});
  // Heading 0 along +x; a right turn bends toward +y.
  const double sign = turn_deg >= 0.0 ? 1.0 : -1.0;
  const Vec2 center{lead_in, sign * radius};
  const double sweep = deg_to_rad(std::abs(turn_deg));
  const int n_arc = std::max(2, static_cast<int>(std::ceil(radius * sweep / 1.0)));
  for (int i = 1; i <= n_arc; ++i) {
    const double a = sweep * i / n_arc;
    pts.push_back({center.x + radius * std::sin(a), center.y - sign * radius * std::cos(a)});
  }
  const double h = deg_to_rad(turn_deg);
  const Vec2 dir{std::cos(h), std::sin(h)};
  const Vec2 end = pts.back();
  const int n_out = std::max(1, static_cast<int>(std::ceil(exit_length / 5.0)));
  for (int i = 1; i <= n_out; ++i) {
    const double d = exit_length * i / n_out;
    pts.push_back({end.x + d * dir.x, end.y + d * dir.y});
  }
  return Route(std::move(name), std::move(pts));
}

Route load_route(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_route: cannot open " + path);
  nlohmann::json js;
  try {
    js = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_route: " + std::string(e.what()));
  }
  std::vector<Vec2> pts;
  for (const auto& p : js.at("waypoints")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  std::vector<Trigger> triggers;
  if (js.contains("triggers")) {
    for (const auto& t : js.at("triggers")) {
      Trigger tr;
      tr.type = trigger_from_string(t.at("type").get<std::string>());
      tr.position = {t.at("position").at(0).get<double>(), t.at("position").at(1).get<double>()};
      tr.red_from = t.value("red_from", tr.red_from);
      tr.red_until = t.value("red_until", tr.red_until);
      tr.extent = t.value("extent", tr.extent);
      triggers.push_back(tr);
    }
  }
  return Route(js.value("name", std::string("route")), std::move(pts), std::move(triggers));
}

void save_route(const Route& route, const std::string& path) {
  nlohmann::json js;
  js["name"] = route.name();
  js["waypoints"] = nlohmann::json::array();
  for (const auto& p : route.waypoints()) js["waypoints"].push_back({p.x, p.y});
  js["triggers"] = nlohmann::json::array();
  for (const auto& t : route.triggers()) {
    js["triggers"].push_back({{"type", to_string(t.type)},
                              {"position", {t.position.x, t.position.y}},
                              {"red_from", t.red_from},
                              {"red_until", t.red_until},
                              {"extent", t.extent}});
  }
  std::ofstream out(path);
  if (!out) throw IoError("save_route: cannot open " + path);
  out << js.dump(2) << '\n';
}

control::Command command_at(const Route& route, double s, double horizon) {
  const double dh = geometry::normalize_angle_deg(route.heading_at(s + horizon) - route.heading_at(s));
  if (dh > 30.0) return control::Command::Right;
  if (dh < -30.0) return control::Command::Left;
  return control::Command::Follow;
}

double route_completion(std::span<const Vec2> driven_path, const Route& route,
                        double corridor_half_width) {
  if (driven_path.empty()) throw InvalidInput("route_completion: empty path");
  double covered = 0.0;
  double frontier = 0.0;  // furthest arc length already credited
  Route::Projection prev = route.project(driven_path.front());
  bool prev_in = std::abs(prev.lateral) <= corridor_half_width;
  for (std::size_t i = 1; i < driven_path.size(); ++i) {
    const Route::Projection cur = route.project(driven_path[i]);
    const bool cur_in = std::abs(cur.lateral) <= corridor_half_width;
    if (prev_in && cur_in && cur.s > frontier) {
      covered += std::max(0.0, cur.s - std::max(prev.s, frontier));
      frontier = cur.s;
    }
    prev = cur;
    prev_in = cur_in;
  }
  return std::min(1.0, covered / route.length());
}

}  // namespace fusedrive::evaluation

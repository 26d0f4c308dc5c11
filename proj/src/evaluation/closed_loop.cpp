#include "fusedrive/evaluation/closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::evaluation {

using geometry::deg_to_rad;

std::string to_string(ScenarioMode m) { return m == ScenarioMode::Normal ? "normal" : "adversarial"; }

ScenarioMode scenario_mode_from_string(const std::string& s) {
  if (s == "normal") return ScenarioMode::Normal;
  if (s == "adversarial") return ScenarioMode::Adversarial;
  throw ConfigError("unknown scenario mode: " + s);
}

AgentOutput ExpertAgent::step(const Observation& obs) { return {policy_.act(obs.privileged), {}}; }

bool in_intersection(const Route& route, double s) {
  for (const auto& t : route.triggers()) {
    if (t.type != TriggerType::Intersection) continue;
    if (std::abs(s - route.trigger_s(t)) <= 0.5 * t.extent) return true;
  }
  return false;
}

bool hazard_ahead(const Scene& scene, const SimState& state, const HazardConfig& cfg,
                  const std::vector<bool>& stop_signs_cleared) {
  const Vec2 ego{state.pose.x, state.pose.y};
  const double s_ego = scene.route.project(ego).s;
  for (const auto& light : scene.lights) {
    const double ahead = light.s - s_ego;
    if (light.is_red(state.time) && ahead > 0.0 && ahead <= cfg.red_light_distance) return true;
  }
  for (std::size_t i = 0; i < scene.stop_signs.size(); ++i) {
    const bool cleared = i < stop_signs_cleared.size() && stop_signs_cleared[i];
    const double ahead = scene.stop_signs[i].s - s_ego;
    if (!cleared && ahead > 0.0 && ahead <= cfg.stop_sign_distance) return true;
  }
  for (const auto& npc : state.npcs) {
    if (!npc.active) continue;
    for (double tau : {0.0, 0.5, 1.0, 1.5}) {
      const Vec2 p{npc.position.x + tau * npc.velocity.x, npc.position.y + tau * npc.velocity.y};
      const Vec2 local = geometry::global_to_local(p, state.pose);
      const double forward = -local.y;
      if (forward > 0.0 && forward <= cfg.npc_distance &&
          std::abs(local.x) < cfg.corridor_half_width + 0.5 * npc.width) {
        return true;
      }
    }
  }
  return false;
}

namespace {

double point_box_distance(Vec2 p, const Box& b) {
  const double h = deg_to_rad(b.heading_deg);
  const double dx = p.x - b.center.x;
  const double dy = p.y - b.center.y;
  const double u = dx * std::cos(h) + dy * std::sin(h);
  const double v = -dx * std::sin(h) + dy * std::cos(h);
  const double ou = std::max(0.0, std::abs(u) - 0.5 * b.length);
  const double ov = std::max(0.0, std::abs(v) - 0.5 * b.width);
  return std::hypot(ou, ov);
}

struct Spawned {
  bool done = false;
};

class WorldMonitor {
 public:
  WorldMonitor(const Scene& scene, const ClosedLoopConfig& cfg)
      : scene_(scene), cfg_(cfg), rng_(cfg.seed),
        spawned_(scene.route.triggers().size()),
        stop_cleared_(scene.stop_signs.size(), false) {}

  const std::vector<bool>& stop_cleared() const { return stop_cleared_; }

  void spawn(SimState& state) {
    if (cfg_.mode != ScenarioMode::Adversarial) return;
    const Route& route = scene_.route;
    const double s_ego = route.project({state.pose.x, state.pose.y}).s;
    const auto& triggers = route.triggers();
    for (std::size_t i = 0; i < triggers.size(); ++i) {
      const auto& t = triggers[i];
      if (spawned_[i].done) continue;
      if (t.type != TriggerType::PedestrianCrossing && t.type != TriggerType::VehicleCrossing) {
        continue;
      }
      const double s_t = route.trigger_s(t);
      const double gap = s_t - s_ego;
      if (gap > 20.0 || gap < 0.0) continue;
      spawned_[i].done = true;

      std::uniform_real_distribution<double> jitter(0.9, 1.1);
      const bool pedestrian = t.type == TriggerType::PedestrianCrossing;
      const double walk = pedestrian ? 1.4 : 5.0;
      const double eta = gap / std::max(state.speed, 2.0) * jitter(rng_);
      const double offset = std::clamp(walk * eta, 3.0, pedestrian ? 14.0 : 30.0);
      const double heading = route.heading_at(s_t);
      const double h = deg_to_rad(heading);
      const Vec2 right{-std::sin(h), std::cos(h)};
      const Vec2 base = route.point_at(s_t);
      // Pedestrians step in from the right, vehicles cut across from the left.
      const double side = pedestrian ? 1.0 : -1.0;

      Npc npc;
      npc.id = static_cast<int>(i);
      npc.kind = pedestrian ? NpcKind::Pedestrian : NpcKind::Vehicle;
      npc.position = {base.x + side * offset * right.x, base.y + side * offset * right.y};
      npc.velocity = {-side * walk * right.x, -side * walk * right.y};
      npc.heading_deg = geometry::normalize_angle_deg(heading + (pedestrian ? 0.0 : 90.0));
      if (pedestrian) {
        npc.length = 0.5;
        npc.width = 0.5;
        npc.height = 1.8;
        npc.color = {220, 160, 40};
      }
      state.npcs.push_back(npc);
      lifetime_.push_back({state.npcs.size() - 1, state.time + 2.0 * offset / walk});
    }
    for (const auto& [idx, until] : lifetime_) {
      if (state.time > until) state.npcs[idx].active = false;
    }
  }

  void check_infractions(const SimState& prev, SimState& state) {
    const Route& route = scene_.route;
    const double s_prev = route.project({prev.pose.x, prev.pose.y}).s;
    const auto proj = route.project({state.pose.x, state.pose.y});
    const Vec2 ego{state.pose.x, state.pose.y};

    double radius = 0.0;
    const auto circles = ego_circles(state, cfg_.vehicle, radius);

    for (const auto& npc : state.npcs) {
      if (!npc.active || hit_npcs_.count(npc.id)) continue;
      const Box b = npc.box();
      for (const auto& c : circles) {
        if (point_box_distance(c, b) < radius) {
          hit_npcs_.insert(npc.id);
          state.pending_infractions.push_back(
              {npc.kind == NpcKind::Pedestrian ? InfractionType::CollisionPedestrian
                                               : InfractionType::CollisionVehicle,
               ego, state.time});
          break;
        }
      }
    }

    bool touching_static = false;
    for (const auto& c : circles) {
      const double lat = route.project(c).lateral;
      if (lat > scene_.road.right_edge + scene_.road.sidewalk_width ||
          lat < scene_.road.left_edge - scene_.road.sidewalk_width) {
        touching_static = true;
      }
      for (const auto& b : scene_.statics) {
        if (point_box_distance(c, b) < radius) touching_static = true;
      }
    }
    if (touching_static && !in_static_contact_) {
      state.pending_infractions.push_back({InfractionType::CollisionStatic, ego, state.time});
    }
    in_static_contact_ = touching_static;

    for (const auto& light : scene_.lights) {
      if (s_prev < light.s && proj.s >= light.s && light.is_red(state.time)) {
        state.pending_infractions.push_back({InfractionType::RedLight, ego, state.time});
      }
    }
    for (std::size_t i = 0; i < scene_.stop_signs.size(); ++i) {
      const double s_sign = scene_.stop_signs[i].s;
      const double ahead = s_sign - proj.s;
      if (state.speed < 0.1 && ahead >= 0.0 && ahead <= 8.0) stop_cleared_[i] = true;
      if (s_prev < s_sign && proj.s >= s_sign && !stop_cleared_[i]) {
        state.pending_infractions.push_back({InfractionType::StopSign, ego, state.time});
        stop_cleared_[i] = true;
      }
    }
  }

 private:
  const Scene& scene_;
  const ClosedLoopConfig& cfg_;
  std::mt19937_64 rng_;
  std::vector<Spawned> spawned_;
  std::vector<std::pair<std::size_t, double>> lifetime_;
  std::vector<bool> stop_cleared_;
  std::set<int> hit_npcs_;
  bool in_static_contact_ = false;
};

}  // namespace

ClosedLoopResult run_closed_loop(Agent& agent, const Scene& scene, const ClosedLoopConfig& cfg,
                                 const SensorRenderer& renderer) {
  if (agent.needs_sensors() && !renderer) {
    throw InvalidInput("run_closed_loop: agent needs sensors but no renderer was given");
  }
  const Route& route = scene.route;
  agent.reset();

  SimState state;
  const Vec2 start = route.point_at(0.0);
  state.pose = {start.x, start.y, geometry::normalize_angle_deg(route.heading_at(0.0))};
  state.speed = cfg.initial_speed;

  WorldMonitor monitor(scene, cfg);
  const auto goals = route.goal_arclengths(cfg.goal_spacing);
  const double timeout = route.length() / cfg.min_average_speed + cfg.timeout_slack;

  ClosedLoopResult out;
  out.path.push_back(start);
  double blocked_for = 0.0;

  while (true) {
    const Vec2 ego{state.pose.x, state.pose.y};
    const double s_ego = route.project(ego).s;
    if (s_ego >= route.length() - 1e-9) {
      out.termination = "route_completed";
      break;
    }
    if (state.time >= timeout) {
      out.termination = "timeout";
      break;
    }
    if (blocked_for >= cfg.blocked_timeout) {
      out.termination = "blocked";
      break;
    }

    Observation obs;
    obs.time = state.time;
    obs.speed = state.speed;
    obs.command = command_at(route, s_ego);
    double goal_s = goals.back();
    for (double g : goals) {
      if (g > s_ego + 4.0) {
        goal_s = g;
        break;
      }
    }
    obs.route_point_local = geometry::global_to_local(route.point_at(goal_s), state.pose);
    obs.privileged.pose = state.pose;
    obs.privileged.speed = state.speed;
    obs.privileged.route = &route;
    obs.privileged.hazard = hazard_ahead(scene, state, cfg.hazard, monitor.stop_cleared());
    obs.privileged.in_intersection = in_intersection(route, s_ego);
    obs.privileged.dt = cfg.dt;

    SensorFrame frame;
    if (agent.needs_sensors()) {
      frame = renderer(scene, state);
      obs.sensors = &frame;
    }

    AgentOutput action;
    try {
      action = agent.step(obs);
    } catch (const std::exception&) {
      out.termination = "agent_error";
      break;
    }

    TraceRecord rec;
    rec.time = state.time;
    rec.pose = state.pose;
    rec.speed = state.speed;
    rec.control = action.control;
    rec.waypoints = action.waypoints;
    rec.hazard = obs.privileged.hazard;
    out.trace.push_back(rec);

    const SimState prev = state;
    state = simulate_step(state, action.control, cfg.dt, cfg.vehicle);
    monitor.spawn(state);
    monitor.check_infractions(prev, state);
    out.path.push_back({state.pose.x, state.pose.y});
    blocked_for = state.speed < 0.1 ? blocked_for + cfg.dt : 0.0;
  }

  const double rc = route_completion(out.path, route, cfg.corridor_half_width);
  out.result = make_route_result(rc, state.pending_infractions, cfg.penalties);
  return out;
}

nlohmann::json to_json(const TraceRecord& rec) {
  nlohmann::json js = {
      {"time", rec.time},
      {"pose", {rec.pose.x, rec.pose.y, rec.pose.heading_deg}},
      {"speed", rec.speed},
      {"control", {rec.control.steering, rec.control.throttle, rec.control.brake}},
      {"hazard", rec.hazard},
  };
  if (rec.waypoints) {
    js["waypoints"] = nlohmann::json::array();
    for (const auto& p : rec.waypoints->points) js["waypoints"].push_back({p.x, p.y});
  }
  return js;
}

nlohmann::json to_json(const RouteResult& result) {
  nlohmann::json infractions = nlohmann::json::array();
  for (const auto& e : result.infractions) {
    infractions.push_back(
        {{"type", to_string(e.type)}, {"position", {e.position.x, e.position.y}}, {"time", e.time}});
  }
  return {{"RC", result.route_completion},
          {"IP", result.infraction_penalty},
          {"DS", result.driving_score},
          {"infractions", infractions}};
}

}  // namespace fusedrive::evaluation

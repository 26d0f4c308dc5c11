#include "fusedrive/training/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fusedrive/common/errors.hpp"
#include "fusedrive/evaluation/expert.hpp"

namespace fusedrive::training {

using evaluation::Route;
using evaluation::Trigger;
using evaluation::TriggerType;
using geometry::Vec2;

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Straight: return "straight";
    case Scenario::Turn: return "turn";
    case Scenario::RedLight: return "red_light";
    case Scenario::LeadVehicle: return "lead_vehicle";
  }
  return "straight";
}

Scenario scenario_from_string(const std::string& s) {
  for (Scenario sc : all_scenarios()) {
    if (to_string(sc) == s) return sc;
  }
  throw ConfigError("unknown scenario: " + s);
}

std::vector<Scenario> all_scenarios() {
  return {Scenario::Straight, Scenario::Turn, Scenario::RedLight, Scenario::LeadVehicle};
}

namespace {

struct Setup {
  Route route;
  double s_start = 0.0;
  double speed = 0.0;
  std::vector<evaluation::Npc> npcs;
};

Setup make_setup(Scenario scenario, std::mt19937_64& rng, const SyntheticConfig& cfg) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  Setup setup;
  switch (scenario) {
    case Scenario::Straight: {
      setup.s_start = uniform(10.0, 30.0);
      setup.speed = uniform(3.6, 4.2);
      std::vector<Trigger> triggers;
      if (unit(rng) < 0.35) {
        // A stop sign far enough ahead that the expert has not reacted yet.
        const double s_sign = setup.s_start + 4.0 * cfg.warmup + uniform(9.0, 20.0);
        triggers.push_back({TriggerType::StopSign, {s_sign, 0.0}});
      }
      const Route base = evaluation::make_straight_route(120.0);
      setup.route = Route("straight", base.waypoints(), triggers);
      break;
    }
    case Scenario::Turn: {
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      const double radius = uniform(8.0, 12.0);
      const double lead_in = 40.0;
      const Route base = evaluation::make_turn_route(lead_in, radius, sign * 90.0, 40.0);
      Trigger zone;
      zone.type = TriggerType::Intersection;
      zone.position = base.point_at(lead_in + 0.25 * std::numbers::pi * radius);
      zone.extent = 0.5 * std::numbers::pi * radius + 12.0;
      setup.route = Route("turn", base.waypoints(), {zone});
      setup.speed = uniform(2.8, 3.2);
      setup.s_start = lead_in - uniform(1.0, 5.0) - 3.0 * cfg.warmup;
      break;
    }
    case Scenario::RedLight: {
      const double s_light = 60.0;
      Trigger light;
      light.type = TriggerType::RedLight;
      light.position = {s_light, 0.0};
      light.red_from = 0.0;
      light.red_until = 1e9;
      const Route base = evaluation::make_straight_route(120.0);
      setup.route = Route("red_light", base.waypoints(), {light});
      setup.speed = uniform(3.6, 4.2);
      setup.s_start = s_light - 12.0 - setup.speed * cfg.warmup + uniform(0.0, 3.0);
      break;
    }
    case Scenario::LeadVehicle: {
      const Route base = evaluation::make_straight_route(120.0);
      setup.route = Route("lead_vehicle", base.waypoints());
      const double s_npc = 60.0;
      evaluation::Npc npc;
      npc.id = 0;
      npc.kind = evaluation::NpcKind::Vehicle;
      npc.position = {s_npc, 0.0};
      npc.velocity = {0.0, 0.0};
      npc.heading_deg = 0.0;
      const evaluation::Color palette[3] = {{40, 60, 200}, {200, 200, 40}, {30, 160, 160}};
      npc.color = palette[std::uniform_int_distribution<int>(0, 2)(rng)];
      setup.npcs.push_back(npc);
      setup.speed = uniform(3.6, 4.2);
      setup.s_start = s_npc - 10.0 - setup.speed * cfg.warmup + uniform(0.0, 3.0);
      break;
    }
  }
  return setup;
}

}  // namespace

Sample generate_synthetic_sample(std::uint64_t seed, Scenario scenario, const SyntheticConfig& cfg) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(scenario)};
  std::mt19937_64 rng(seq);
  Setup setup = make_setup(scenario, rng, cfg);
  const evaluation::Scene scene = evaluation::make_scene(setup.route, rng());
  const Route& route = scene.route;

  evaluation::SimState state;
  const Vec2 start = route.point_at(setup.s_start);
  state.pose = {start.x, start.y, geometry::normalize_angle_deg(route.heading_at(setup.s_start))};
  state.speed = setup.speed;
  state.npcs = setup.npcs;

  evaluation::ExpertPolicy expert;
  evaluation::HazardConfig hazard_cfg;
  const std::vector<bool> no_stops_cleared(scene.stop_signs.size(), false);
  auto view_of = [&](const evaluation::SimState& st) {
    evaluation::PrivilegedView view;
    view.pose = st.pose;
    view.speed = st.speed;
    view.route = &route;
    view.hazard = evaluation::hazard_ahead(scene, st, hazard_cfg, no_stops_cleared);
    view.in_intersection =
        evaluation::in_intersection(route, route.project({st.pose.x, st.pose.y}).s);
    view.dt = cfg.dt;
    return view;
  };

  const int warmup_steps = static_cast<int>(std::lround(cfg.warmup / cfg.dt));
  for (int i = 0; i < warmup_steps; ++i) {
    const auto cmd = expert.act(view_of(state));
    state = evaluation::simulate_step(state, cmd, cfg.dt);
  }

  const auto view = view_of(state);
  const auto cmd = expert.act(view);
  const double target = expert.target_speed(view);
  const Vec2 ego{state.pose.x, state.pose.y};
  const double s_ego = route.project(ego).s;

  Sample sample;
  sample.scenario = to_string(scenario);
  sample.seed = seed;
  sample.pose = state.pose;
  sample.speed = state.speed;
  sample.controls = {cmd.steering, cmd.throttle, static_cast<double>(cmd.brake)};
  sample.command = evaluation::command_at(route, s_ego);

  // Ideal future positions: where the route would take the ego at the
  // target speed, one point every waypoint_dt seconds.
  for (int i = 0; i < 3; ++i) {
    if (target <= 0.0) {
      sample.waypoints.points[i] = {0.0, 0.0};
      continue;
    }
    const double s = std::min(route.length(), s_ego + target * cfg.waypoint_dt * (i + 1));
    sample.waypoints.points[i] = geometry::global_to_local(route.point_at(s), state.pose);
  }

  const auto goals = route.goal_arclengths(20.0);
  double goal_s = goals.back();
  for (double g : goals) {
    if (g > s_ego + 4.0) {
      goal_s = g;
      break;
    }
  }
  sample.route_point = geometry::global_to_local(route.point_at(goal_s), state.pose);

  for (const auto& light : scene.lights) {
    const double ahead = light.s - s_ego;
    if (light.is_red(state.time) && ahead > 0.0 && ahead <= 20.0) sample.traffic_light = 1.0;
  }
  for (const auto& sign : scene.stop_signs) {
    const double ahead = sign.s - s_ego;
    if (ahead > 0.0 && ahead <= cfg.stop_sign_range) sample.stop_sign = 1.0;
  }

  RenderedView rendered = render_view(scene, state, cfg.render);
  sample.rgb = std::move(rendered.rgb);
  sample.depth = geometry::encode_depth(rendered.depth);
  sample.seg = std::move(rendered.seg);
  return sample;
}

}  // namespace fusedrive::training

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fusedrive/training/render.hpp"
#include "fusedrive/training/sample.hpp"

namespace fusedrive::training {

enum class Scenario { Straight, Turn, RedLight, LeadVehicle };

std::string to_string(Scenario s);
// Throws ConfigError for names outside straight / turn / red_light / lead_vehicle.
Scenario scenario_from_string(const std::string& s);
std::vector<Scenario> all_scenarios();

struct SyntheticConfig {
  RenderConfig render;
  double waypoint_dt = 0.5;  // seconds between ground-truth waypoints
  double warmup = 2.0;       // seconds the expert drives before the labelled frame
  double dt = 0.05;
  double stop_sign_range = 25.0;
};

// Procedurally build a scenario, let the expert drive into it, and label
// the resulting frame. Deterministic for a given (seed, scenario).
Sample generate_synthetic_sample(std::uint64_t seed, Scenario scenario,
                                 const SyntheticConfig& cfg = {});

}  // namespace fusedrive::training

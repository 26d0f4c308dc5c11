// Runs the thirteen acceptance checks and prints one PASS/FAIL line each.
// Usage: fusedrive_acceptance [criterion ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "fusedrive/common/runtime.hpp"
#include "fusedrive/control/controls.hpp"
#include "fusedrive/evaluation/closed_loop.hpp"
#include "fusedrive/evaluation/metrics.hpp"
#include "fusedrive/evaluation/route.hpp"
#include "fusedrive/geometry/depth.hpp"
#include "fusedrive/geometry/sdc.hpp"
#include "fusedrive/geometry/transform.hpp"
#include "fusedrive/model/config.hpp"
#include "fusedrive/model/control_net.hpp"
#include "fusedrive/model/driving_model.hpp"
#include "fusedrive/training/losses.hpp"
#include "fusedrive/training/model_eval.hpp"
#include "fusedrive/training/schedule.hpp"
#include "fusedrive/training/synthetic.hpp"
#include "fusedrive/training/trainer.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fusedrive;
using fusedrive::testing::Gen;

namespace {

// Tolerances and budgets.
constexpr double kDepthBudgetS = 5.0;
constexpr double kGeometryBudgetS = 30.0;
constexpr double kTransformTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradAbsFloor = 1e-10;
constexpr double kGradStep = 1e-5;
constexpr double kGradBudgetS = 120.0;
constexpr double kSegHandValue = 1.0265;
constexpr double kSegHandTol = 1e-3;
constexpr double kLinearityTol = 1e-12;
constexpr double kMetricTol = 1e-12;
constexpr double kOverfitReduction = 0.90;
constexpr double kOverfitSegBce = 0.05;
constexpr double kOverfitWpMae = 0.1;
constexpr double kOverfitBudgetS = 600.0;
constexpr double kSpeedTarget = 4.0;
constexpr double kSpeedTol = 0.2;
constexpr double kSettleTime = 10.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string source_path(const std::string& rel) { return std::string(FUSEDRIVE_SOURCE_DIR) + "/" + rel; }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("fusedrive_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + FUSEDRIVE_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 1. Depth codec ---------------------------------------------------------------

Outcome depth_codec() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_real_distribution<double> meters(0.0, 1000.0);
  const double step = 1000.0 / 16777215.0;
  int exact = 0, roundtrip = 0;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const int r = byte(rng), g = byte(rng), b = byte(rng);
    if (geometry::decode_depth_value(r, g, b) == fusedrive::testing::code_oracle(r, g, b)) ++exact;
    const auto enc = geometry::encode_depth_value(geometry::decode_depth_value(r, g, b));
    const double d = meters(rng);
    const auto e = geometry::encode_depth_value(d);
    const double err = std::abs(geometry::decode_depth_value(e[0], e[1], e[2]) - d);
    worst = std::max(worst, err);
    if (enc == std::array<int, 3>{r, g, b} && err < step) ++roundtrip;
  }
  const double t = seconds_since(t0);
  return {exact == 10000 && roundtrip == 10000 && t < kDepthBudgetS,
          "exact " + std::to_string(exact) + "/10000, round trip " + std::to_string(roundtrip) +
              "/10000, worst error " + fmt(worst) + " m, " + fmt(t) + " s"};
}

// 2. Geometry oracle -------------------------------------------------------------

Outcome geometry_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Gen gen(2);
  const auto cfg = fusedrive::testing::tiny_sdc_config(42.0);
  const auto front = fusedrive::testing::tiny_camera(0.0);
  const auto left = fusedrive::testing::tiny_camera(-60.0);
  const auto right = fusedrive::testing::tiny_camera(60.0);
  int camera_ok = 0, merge_ok = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::array<geometry::SdcGrid, 3> grids;
    std::array<geometry::SdcGrid, 3> oracle;
    const std::array<const geometry::CameraSpec*, 3> cams{&front, &left, &right};
    bool cams_match = true;
    for (int k = 0; k < 3; ++k) {
      const int cols = k == 0 ? cfg.front_cols : cfg.side_cols;
      const auto depth = gen.depth_map(8, 8, cfg.forward_range * 1.2);
      const auto cls = gen.class_map(8, 8, cfg.num_classes);
      grids[k] = geometry::build_camera_sdc(depth, cls, *cams[k], cols, cfg);
      oracle[k] = fusedrive::testing::camera_oracle(depth, cls, *cams[k], cols, cfg);
      cams_match = cams_match && grids[k] == oracle[k];
    }
    camera_ok += cams_match;
    const auto merged = geometry::merge_sdc(grids[0], grids[1], grids[2], cfg).grid;
    merge_ok += merged == fusedrive::testing::merge_oracle(grids[0], grids[1], grids[2], cfg);
  }
  const double t = seconds_since(t0);
  return {camera_ok == 200 && merge_ok == 200 && t < kGeometryBudgetS,
          "camera " + std::to_string(camera_ok) + "/200, merge (42 deg) " + std::to_string(merge_ok) + "/200, " +
              fmt(t) + " s"};
}

// 3. Coordinate transform -------------------------------------------------------

Outcome coordinate_transform() {
  Gen gen(3);
  double worst_iso = 0.0, worst_inv = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto pose = gen.pose();
    const auto a = gen.point();
    const auto b = gen.point();
    const auto la = geometry::global_to_local(a, pose);
    const auto lb = geometry::global_to_local(b, pose);
    worst_iso = std::max(worst_iso, std::abs(geometry::distance(la, lb) - geometry::distance(a, b)));
    const auto back = geometry::local_to_global(la, pose);
    worst_inv = std::max(worst_inv, geometry::distance(back, a));
  }
  const auto e1 = geometry::global_to_local({3, 4}, {0, 0, -90});
  const auto e2 = geometry::global_to_local({1, 0}, {0, 0, 0});
  const auto e3 = geometry::global_to_local({12.5, -7.25}, {12.5, -7.25, 33.0});
  const bool examples = e1.x == 3.0 && e1.y == 4.0 && e2.x == 0.0 && e2.y == -1.0 && e3.x == 0.0 && e3.y == 0.0;
  return {worst_iso < kTransformTol && worst_inv < kTransformTol && examples,
          "isometry " + fmt(worst_iso) + ", inverse " + fmt(worst_inv) + ", worked examples " +
              (examples ? "exact" : "mismatch")};
}

// 4. Shape contract --------------------------------------------------------------

Outcome shape_contract() {
  const auto cfg = model::ModelConfig::paper();
  auto net = model::make_model(cfg, 4);
  net->eval();
  torch::NoGradGuard ng;
  model::ModelInput in;
  in.rgb = torch::rand({1, 3, 160, 768});
  in.depth = torch::rand({1, 160, 768}, torch::kFloat64) * 80.0;
  in.measurement = torch::zeros({1, 9});
  in.measurement[0][0] = 2.5;
  in.measurement[0][4] = 1.0;
  in.measurement[0][8] = -10.0;
  const auto out = net->forward(in);
  const bool rgb = out.rgb_features.sizes() == torch::IntArrayRef({1, 384, 10, 48});
  const bool sdc = out.sdc_features.sizes() == torch::IntArrayRef({1, 192, 10, 48});
  const bool seg = out.seg.sizes() == torch::IntArrayRef({1, 23, 160, 768});
  const bool wp = out.waypoints.sizes() == torch::IntArrayRef({1, 3, 2});
  const auto c = out.controls[0].to(torch::kFloat64);
  const double steer = c[0].item<double>(), throttle = c[1].item<double>(), brake = c[2].item<double>();
  const bool ranges = steer >= -1.0 && steer <= 1.0 && throttle >= 0.0 && throttle <= 0.75 && brake >= 0.0 &&
                      brake <= 1.0;
  auto as3 = [](const torch::Tensor& t) {
    const auto d = t[0].to(torch::kFloat64);
    return std::array<double, 3>{d[0].item<double>(), d[1].item<double>(), d[2].item<double>()};
  };
  const auto emitted = control::combine_controls(as3(out.raw_control), as3(out.adjustment), cfg.combine);
  const bool finite = torch::isfinite(out.rgb_features).all().item<bool>() &&
                      torch::isfinite(out.sdc_features).all().item<bool>() &&
                      torch::isfinite(out.seg).all().item<bool>();
  return {rgb && sdc && seg && wp && ranges && emitted.in_range() && finite,
          "rgb " + std::string(rgb ? "384x10x48" : "wrong") + ", sdc " + (sdc ? "192x10x48" : "wrong") + ", seg " +
              (seg ? "23x160x768" : "wrong") + ", waypoints " + (wp ? "3" : "wrong") + ", controls (" + fmt(steer) +
              ", " + fmt(throttle) + ", " + fmt(brake) + ")"};
}

// 5. Gradient check --------------------------------------------------------------

Outcome gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = model::ModelConfig::toy();
  auto net = model::make_model(cfg, 5);
  net->to(torch::kFloat64);
  net->eval();

  const auto sample = training::to_tensors(training::generate_synthetic_sample(55, training::Scenario::Turn));
  auto batch = training::make_batch({sample}, {0}, cfg.sdc.num_classes, torch::kFloat64);
  // A fixed BEV map keeps the non-differentiable arg-max out of the loss.
  batch.input.sdc = net->build_sdc(batch.targets.seg, batch.input.depth).to(torch::kFloat64);

  std::mt19937_64 rng(5);
  training::LossWeights w{};
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  double wsum = 0.0;
  for (auto& x : w) wsum += (x = unit(rng));
  for (auto& x : w) x *= 8.0 / wsum;

  auto loss_fn = [&]() {
    return training::total_loss(training::compute_task_losses(net->forward(batch.input), batch.targets), w);
  };

  auto params = net->parameters();
  std::vector<std::int64_t> offsets{0};
  for (const auto& p : params) offsets.push_back(offsets.back() + p.numel());
  std::uniform_int_distribution<std::int64_t> pick(0, offsets.back() - 1);

  net->zero_grad();
  loss_fn().backward();

  int ok = 0;
  int near_zero = 0;
  double worst = 0.0;
  torch::NoGradGuard ng;
  for (int i = 0; i < 32; ++i) {
    const auto flat = pick(rng);
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), flat) - 1;
    const auto pi = static_cast<std::size_t>(it - offsets.begin());
    auto view = params[pi].view({-1});
    const auto idx = flat - *it;
    const double analytic = params[pi].grad().view({-1})[idx].item<double>();
    const double orig = view[idx].item<double>();
    view[idx] = orig + kGradStep;
    const double up = loss_fn().item<double>();
    view[idx] = orig - kGradStep;
    const double down = loss_fn().item<double>();
    view[idx] = orig;
    const double numeric = (up - down) / (2.0 * kGradStep);
    const double err = std::abs(analytic - numeric);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    const double rel = scale > 0.0 ? err / scale : 0.0;
    if (err <= kGradRelTol * scale + kGradAbsFloor) {
      ++ok;
      // Tiny gradients sit at the finite-difference round-off level and pass on the absolute floor.
      if (rel > kGradRelTol) {
        ++near_zero;
      } else {
        worst = std::max(worst, rel);
      }
    } else {
      std::cerr << "  gradient mismatch at parameter " << pi << "[" << idx << "]: analytic " << analytic
                << ", numeric " << numeric << "\n";
    }
  }
  const double t = seconds_since(t0);
  return {ok == 32 && t < kGradBudgetS,
          std::to_string(ok) + "/32 within 1e-4 relative + 1e-10, worst relative " + fmt(worst) + ", " +
              std::to_string(near_zero) + " near-zero on the absolute floor, " + fmt(t) + " s"};
}

// 6. Loss identities ----------------------------------------------------------

Outcome loss_identities() {
  const auto y = (torch::rand({2, 23, 8, 8}, torch::kFloat64) > 0.8).to(torch::kFloat64);
  const double perfect = training::seg_loss(y, y).item<double>();
  const auto ones = torch::ones({1, 1, 2, 2}, torch::kFloat64);
  const double hand = training::seg_loss(torch::full({1, 1, 2, 2}, 0.5, torch::kFloat64), ones).item<double>();

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    training::TaskLosses l;
    training::LossWeights a{}, b{}, mix{};
    const double s = u(rng), t = u(rng);
    for (int k = 0; k < training::kNumTasks; ++k) {
      l[k] = torch::tensor(u(rng), torch::kFloat64);
      a[k] = u(rng);
      b[k] = u(rng);
      mix[k] = s * a[k] + t * b[k];
    }
    const double lhs = training::total_loss(l, mix).item<double>();
    const double rhs = s * training::total_loss(l, a).item<double>() + t * training::total_loss(l, b).item<double>();
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return {perfect == 0.0 && std::abs(hand - kSegHandValue) < kSegHandTol && worst < kLinearityTol,
          "perfect " + fmt(perfect) + ", 2x2 case " + fmt(hand) + ", linearity error " + fmt(worst)};
}

// 7. MGN ------------------------------------------------------------------------

Outcome mgn_balance() {
  // Two tasks share a parameter vector; the first task's gradient there is
  // three times stronger than the second's.
  const auto theta = torch::randn({6}, torch::dtype(torch::kFloat64).requires_grad(true));
  const auto u1 = torch::tensor({3.0, 0.0, 0.0, 0.0, 0.0, 0.0}, torch::kFloat64);
  const auto u2 = torch::tensor({0.0, 0.6, 0.8, 0.0, 0.0, 0.0}, torch::kFloat64);
  auto norms = [&]() {
    const auto g1 = torch::autograd::grad({(u1 * theta).sum()}, {theta})[0].norm().item<double>();
    const auto g2 = torch::autograd::grad({(u2 * theta).sum()}, {theta})[0].norm().item<double>();
    return std::vector<double>{g1, g2};
  };
  std::vector<double> w{4.0, 4.0};
  const training::MgnConfig cfg;
  bool monotone = true, invariants = true;
  double gap = std::abs(std::log(w[0] * 3.0 / (w[1] * 1.0)));
  for (int it = 0; it < 50; ++it) {
    const auto g = norms();
    const auto next = training::mgn_update(w, g, {1.0, 1.0}, cfg);
    invariants = invariants && next[0] > 0.0 && next[1] > 0.0 && std::abs(next[0] + next[1] - 8.0) < 1e-12;
    const double next_gap = std::abs(std::log(next[0] * g[0] / (next[1] * g[1])));
    monotone = monotone && next_gap <= gap + 1e-15 && next[0] <= w[0] && next[1] >= w[1];
    gap = next_gap;
    w = next;
  }
  const bool balanced = gap < 1e-6;
  return {monotone && invariants && balanced, "weights after 50 updates (" + fmt(w[0]) + ", " + fmt(w[1]) +
                                                  "), log imbalance " + fmt(gap) +
                                                  (monotone ? ", monotone" : ", not monotone")};
}

// 8. Overfit oracle ---------------------------------------------------------

Outcome overfit() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = model::load_run_config(source_path("configs/overfit.yaml"));
  std::vector<training::TensorSample> data;
  const auto scenarios = training::all_scenarios();
  for (int i = 0; i < 10; ++i) {
    data.push_back(training::to_tensors(
        training::generate_synthetic_sample(100 + i, scenarios[static_cast<std::size_t>(i) % scenarios.size()])));
  }
  training::Trainer trainer(cfg, data, data);
  const auto before = trainer.evaluate(data);
  const double initial = std::accumulate(before.begin(), before.end(), 0.0);
  trainer.run();
  const auto after = trainer.evaluate(data);
  const double final_loss = std::accumulate(after.begin(), after.end(), 0.0);
  const auto metrics = training::evaluate_task_metrics(trainer.model(), data);
  const double reduction = 1.0 - final_loss / initial;
  const double t = seconds_since(t0);
  const bool pass = trainer.step() <= 300 && reduction >= kOverfitReduction && metrics.bce_seg < kOverfitSegBce &&
                    metrics.mae_wp < kOverfitWpMae && t < kOverfitBudgetS;
  return {pass, "steps " + std::to_string(trainer.step()) + ", loss " + fmt(initial) + " -> " + fmt(final_loss) +
                    " (" + fmt(100.0 * reduction) + "% reduction), seg BCE " + fmt(metrics.bce_seg) +
                    ", waypoint MAE " + fmt(metrics.mae_wp) + " m, " + fmt(t) + " s"};
}

// 9. Expert closed loop ---------------------------------------------------------

Outcome expert_loop() {
  const auto route = evaluation::load_route(source_path("routes/straight_100.json"));
  const auto scene = evaluation::make_scene(route, 9);
  evaluation::ExpertAgent expert;
  evaluation::ClosedLoopConfig cfg;
  cfg.seed = 9;
  const auto res = evaluation::run_closed_loop(expert, scene, cfg);
  double worst = 0.0;
  for (const auto& rec : res.trace) {
    if (rec.time >= kSettleTime) worst = std::max(worst, std::abs(rec.speed - kSpeedTarget));
  }
  const auto& r = res.result;
  const bool pass = r.route_completion == 1.0 && r.infraction_penalty == 1.0 && r.driving_score == 1.0 &&
                    worst <= kSpeedTol && res.trace.back().time >= kSettleTime;
  return {pass, "RC " + fmt(r.route_completion) + ", IP " + fmt(r.infraction_penalty) + ", DS " +
                    fmt(r.driving_score) + ", max |v - 4| after 10 s " + fmt(worst) + " m/s, termination " +
                    res.termination};
}

// 10. Metrics ---------------------------------------------------------------

Outcome metrics_check() {
  const auto table = evaluation::default_penalties();
  evaluation::RouteResult a, b;
  a.route_completion = 0.8;
  a.infraction_penalty = 1.0;
  b.route_completion = 0.6;
  b.infraction_penalty = 0.5;
  const std::vector<evaluation::RouteResult> two{a, b};
  const double ds = evaluation::driving_score(two);
  const std::vector<evaluation::InfractionEvent> events{{evaluation::InfractionType::RedLight, {}, 0.0},
                                                        {evaluation::InfractionType::CollisionVehicle, {}, 1.0}};
  const double ip = evaluation::infraction_penalty(events, table);
  const auto expert = evaluation::make_route_result(0.99919, {}, table);
  const std::vector<evaluation::RouteResult> one{expert};
  const double expert_ds = 100.0 * evaluation::driving_score(one);
  const bool pass = std::abs(ds - 0.55) < kMetricTol && std::abs(ip - 0.42) < kMetricTol &&
                    std::abs(expert_ds - 99.919) < kMetricTol && expert.infraction_penalty == 1.0;
  return {pass, "composite DS " + fmt(ds) + ", double infraction IP " + fmt(ip) + ", expert row DS " + fmt(expert_ds)};
}

// 11. Control invariants -----------------------------------------------------

Outcome control_invariants() {
  // The emitted command depends on the network only through the control
  // path, so each trial redraws that path's weights (with a random scale)
  // and drives it with random features before combination, PID and
  // arbitration. A handful of full toy models go through the same path.
  const auto toy = model::ModelConfig::toy();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0;
  auto emit = [&](const torch::Tensor& raw, const torch::Tensor& adj, const torch::Tensor& wp, double beta,
                  double speed, control::CombineMode mode) {
    auto as3 = [](const torch::Tensor& t) {
      const auto d = t.to(torch::kFloat64);
      return std::array<double, 3>{d[0].item<double>(), d[1].item<double>(), d[2].item<double>()};
    };
    control::WaypointSet set;
    const auto w = wp.to(torch::kFloat64);
    for (int i = 0; i < 3; ++i) set.points[i] = {w[i][0].item<double>(), w[i][1].item<double>()};
    control::PidState lat(control::PidGains::lateral()), lon(control::PidGains::longitudinal());
    control::ControlCommand pid;
    for (int k = 0; k < 3; ++k) pid = control::pid_control(set, speed, lat, lon);
    const auto mlp = control::combine_controls(as3(raw), as3(adj), mode);
    const auto out = control::control_arbitration(mlp, pid, beta);
    const bool ok = out.steering >= -1.0 && out.steering <= 1.0 && out.throttle >= 0.0 && out.throttle <= 0.75 &&
                    (out.brake == 0 || out.brake == 1) && mlp.in_range() && pid.in_range();
    if (!ok) ++violations;
  };

  torch::NoGradGuard ng;
  for (int trial = 0; trial < 1000; ++trial) {
    torch::manual_seed(1000 + trial);
    const int d = 32;
    model::Fusion fusion(toy.rgb_channels(), toy.sdc_channels(), 9, d);
    model::BiasModule bias(toy.rgb_channels(), d);
    model::WaypointBranch wp(d, 16);
    model::DynamicBranch dyn(d, 16);
    const double scale = std::pow(10.0, 2.0 * u(rng));
    for (auto* m : std::initializer_list<torch::nn::Module*>{fusion.get(), bias.get(), wp.get(), dyn.get()}) {
      for (auto& p : m->parameters()) p.mul_(scale);
    }
    fusion->eval();
    const auto rgb = torch::randn({1, toy.rgb_channels(), 10, 48}) * 10.0;
    const auto sdc = torch::randn({1, toy.sdc_channels(), 10, 48}) * 10.0;
    auto meas = torch::zeros({1, 9});
    meas[0][0] = 6.0 * u(rng);
    meas[0][1 + static_cast<int>(6 * u(rng)) % 6] = 1.0;
    meas[0][7] = 40.0 * (u(rng) - 0.5);
    meas[0][8] = -40.0 * u(rng);
    const auto fused = fusion->forward(rgb, sdc, meas);
    const auto bp = bias->forward(rgb);
    const auto br = wp->forward(fused, meas.slice(1, 7, 9), bp);
    const auto adj = dyn->forward(fused, br.raw_control, bp);
    const double beta = trial % 10 == 0 ? 0.0 : (trial % 10 == 1 ? 1.0 : u(rng));
    const auto mode = trial % 2 == 0 ? control::CombineMode::Mean : control::CombineMode::ClampSum;
    emit(br.raw_control[0], adj[0], br.waypoints[0], beta, meas[0][0].item<double>(), mode);
  }
  for (int m = 0; m < 3; ++m) {
    auto net = model::make_model(toy, 700 + m);
    net->eval();
    model::ModelInput in;
    in.rgb = torch::rand({1, 3, 160, 768});
    in.depth = torch::rand({1, 160, 768}, torch::kFloat64) * 70.0;
    in.measurement = torch::zeros({1, 9});
    in.measurement[0][3] = 1.0;
    const auto out = net->forward(in);
    emit(out.raw_control[0], out.adjustment[0], out.waypoints[0], 0.5, 2.0, toy.combine);
  }

  // Arbitration endpoints on random command pairs.
  int endpoint_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    control::ControlCommand a{2.0 * u(rng) - 1.0, 0.75 * u(rng), u(rng) < 0.5 ? 1 : 0};
    control::ControlCommand b{2.0 * u(rng) - 1.0, 0.75 * u(rng), u(rng) < 0.5 ? 1 : 0};
    if (!(control::control_arbitration(a, b, 1.0) == a)) ++endpoint_failures;
    if (!(control::control_arbitration(a, b, 0.0) == b)) ++endpoint_failures;
  }
  return {violations == 0 && endpoint_failures == 0,
          std::to_string(violations) + " range violations over 1003 initializations, " +
              std::to_string(endpoint_failures) + " endpoint mismatches"};
}

// 12. Determinism ---------------------------------------------------------------

const char* kTinyTrainYaml = R"(model:
  preset: toy
train:
  batch_size: 2
  max_epochs: 2
  steps_per_epoch: 2
  seed: 12
)";

Outcome determinism() {
  const auto dir = scratch("determinism");
  const auto data = dir / "data";
  if (run_cli("gen-data --count 4 --seed 12 --out \"" + data.string() + "\"", dir / "gen.log") != 0) {
    return {false, "gen-data failed: " + slurp(dir / "gen.log")};
  }
  std::ofstream(dir / "tiny.yaml") << kTinyTrainYaml;
  std::array<std::string, 2> metrics, traces, results;
  for (int run = 0; run < 2; ++run) {
    const auto out = dir / ("train" + std::to_string(run));
    const auto sim = dir / ("sim" + std::to_string(run));
    if (run_cli("train --config \"" + (dir / "tiny.yaml").string() + "\" --data \"" + data.string() + "\" --out \"" +
                    out.string() + "\"",
                dir / "train.log") != 0) {
      return {false, "train failed: " + slurp(dir / "train.log")};
    }
    if (run_cli("simulate --route \"" + source_path("routes/pedestrian_crossing_120.json") +
                    "\" --agent expert --mode adversarial --seed 12 --log \"" + sim.string() + "\"",
                dir / "sim.log") != 0) {
      return {false, "simulate failed: " + slurp(dir / "sim.log")};
    }
    metrics[run] = slurp(out / "metrics.jsonl");
    traces[run] = slurp(sim / "trace.jsonl");
    results[run] = slurp(sim / "result.json");
  }
  const bool train_same = !metrics[0].empty() && metrics[0] == metrics[1];
  const bool sim_same = !traces[0].empty() && traces[0] == traces[1] && results[0] == results[1];
  return {train_same && sim_same, std::string("train metrics ") + (train_same ? "identical" : "differ") +
                                      ", simulate trace " + (sim_same ? "identical" : "differs")};
}

// 13. Ablation flags -----------------------------------------------------------

Outcome ablations() {
  const auto dir = scratch("ablations");
  const auto data = dir / "data";
  if (run_cli("gen-data --count 4 --seed 13 --out \"" + data.string() + "\"", dir / "gen.log") != 0) {
    return {false, "gen-data failed: " + slurp(dir / "gen.log")};
  }
  std::ofstream(dir / "one_epoch.yaml") << "model:\n  preset: toy\ntrain:\n  batch_size: 2\n  max_epochs: 1\n  seed: 13\n";
  std::vector<std::string> notes;
  bool pass = true;
  for (const std::string flag : {"no-sdc-sides", "no-cvt", "no-vc"}) {
    const auto out = dir / flag;
    const bool trained = run_cli("train --config \"" + (dir / "one_epoch.yaml").string() + "\" --data \"" +
                                     data.string() + "\" --out \"" + out.string() + "\" --" + flag,
                                 dir / (flag + "_train.log")) == 0;
    const bool evaluated = trained && run_cli("eval --data \"" + data.string() + "\" --ckpt \"" +
                                                  (out / "best.pt").string() + "\" --out \"" +
                                                  (out / "eval.json").string() + "\"",
                                              dir / (flag + "_eval.log")) == 0;
    bool changed = false;
    if (evaluated) {
      auto loaded = training::load_model((out / "best.pt").string());
      auto& net = loaded.model;
      const auto& ab = loaded.config.model.ablations;
      if (flag == "no-vc") {
        changed = ab.no_vc && net->dynamic_branch.is_empty() && !net->has_control_path();
      } else if (flag == "no-cvt") {
        changed = ab.no_cvt && net->cvt.is_empty() && !net->rgb_cnn.is_empty();
      } else {
        // A scene seen only by the side cameras leaves the BEV map empty.
        torch::NoGradGuard ng;
        const auto& sc = loaded.config.model.sdc;
        auto seg = torch::zeros({1, sc.num_classes, 160, 768});
        seg.select(1, 7).fill_(1.0);
        auto depth = torch::full({1, 160, 768}, 10.0, torch::kFloat64);
        const int left_end = sc.side_cols;
        depth.slice(2, left_end, left_end + sc.front_cols).fill_(0.0);
        changed = ab.no_sdc_sides && net->build_sdc(seg, depth).sum().item<double>() == 0.0;
      }
    }
    pass = pass && trained && evaluated && changed;
    notes.push_back(flag + (trained ? (evaluated ? (changed ? " ok" : " architecture unchanged") : " eval failed")
                                    : " train failed"));
  }
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  torch::set_num_threads(1);
  torch::manual_seed(0);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"depth codec", depth_codec},
      {"geometry oracle", geometry_oracle},
      {"coordinate transform", coordinate_transform},
      {"shape contract", shape_contract},
      {"gradient check", gradient_check},
      {"loss identities", loss_identities},
      {"MGN balance", mgn_balance},
      {"overfit oracle", overfit},
      {"expert closed loop", expert_loop},
      {"metrics", metrics_check},
      {"control invariants", control_invariants},
      {"determinism", determinism},
      {"ablation flags", ablations},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%-4s %2d %-22s %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

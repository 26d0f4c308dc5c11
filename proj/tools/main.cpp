#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "fusedrive/common/errors.hpp"
#include "fusedrive/common/runtime.hpp"
#include "fusedrive/evaluation/closed_loop.hpp"
#include "fusedrive/model/agent.hpp"
#include "fusedrive/model/config.hpp"
#include "fusedrive/training/model_eval.hpp"
#include "fusedrive/training/render.hpp"
#include "fusedrive/training/synthetic.hpp"
#include "fusedrive/training/trainer.hpp"
#include "plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fusedrive;

namespace {

int gen_data(const std::string& scenario, int count, std::uint64_t seed, const std::string& out) {
  std::vector<training::Scenario> cycle;
  if (scenario == "all") {
    cycle = training::all_scenarios();
  } else {
    cycle = {training::scenario_from_string(scenario)};
  }
  fs::create_directories(out);
  for (int i = 0; i < count; ++i) {
    const auto sc = cycle[static_cast<std::size_t>(i) % cycle.size()];
    const auto sample = training::generate_synthetic_sample(seed + static_cast<std::uint64_t>(i), sc);
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%05d", i);
    training::write_sample(sample, (fs::path(out) / name).string());
  }
  std::cout << "wrote " << count << " samples to " << out << "\n";
  return 0;
}

struct TrainArgs {
  std::string config, data, out;
  bool no_sdc_sides = false, no_cvt = false, no_vc = false, resume = false;
  int max_epochs = 0;
};

int train(const TrainArgs& a) {
  auto cfg = model::load_run_config(a.config);
  cfg.model.ablations.no_sdc_sides |= a.no_sdc_sides;
  cfg.model.ablations.no_cvt |= a.no_cvt;
  cfg.model.ablations.no_vc |= a.no_vc;
  if (a.max_epochs > 0) {
    cfg.train.max_epochs = a.max_epochs;
    cfg.train.schedule.max_epochs = a.max_epochs;
  }
  cfg.model.validate();

  std::vector<training::TensorSample> train_set, val_set;
  training::split_dataset(training::load_dataset(a.data), cfg.train.val_fraction, train_set, val_set);
  training::Trainer trainer(cfg, std::move(train_set), std::move(val_set));

  fs::create_directories(a.out);
  const auto last = fs::path(a.out) / "last.pt";
  if (a.resume && fs::exists(last)) {
    trainer.load_checkpoint(last.string());
    std::cout << "resumed at epoch " << trainer.epoch() << "\n";
  } else {
    fs::remove(fs::path(a.out) / "metrics.jsonl");
  }
  {
    std::ofstream out(fs::path(a.out) / "config.yaml");
    out << model::to_yaml(cfg);
  }
  for (const auto& rec : trainer.run(a.out)) std::cout << training::to_json_line(rec) << "\n";
  return 0;
}

std::unique_ptr<evaluation::Agent> make_agent(const std::string& spec) {
  if (spec == "expert") return std::make_unique<evaluation::ExpertAgent>();
  const std::string prefix = "model:";
  if (spec.rfind(prefix, 0) == 0) {
    auto loaded = training::load_model(spec.substr(prefix.size()));
    return std::make_unique<model::ModelAgent>(loaded.model);
  }
  throw ConfigError("agent must be 'expert' or 'model:<checkpoint>'");
}

evaluation::ClosedLoopResult drive(evaluation::Agent& agent, const evaluation::Route& route,
                                   const std::string& mode, std::uint64_t seed, double dt) {
  evaluation::ClosedLoopConfig cfg;
  cfg.mode = evaluation::scenario_mode_from_string(mode);
  cfg.seed = seed;
  cfg.dt = dt;
  const auto scene = evaluation::make_scene(route, seed);
  return evaluation::run_closed_loop(agent, scene, cfg, training::make_sensor_renderer());
}

json result_json(const evaluation::Route& route, const evaluation::ClosedLoopResult& r) {
  json js = evaluation::to_json(r.result);
  js["route"] = route.name();
  js["termination"] = r.termination;
  js["steps"] = r.trace.size();
  return js;
}

int simulate(const std::string& route_path, const std::string& agent_spec, const std::string& mode,
             std::uint64_t seed, const std::string& log_dir, double dt) {
  const auto route = evaluation::load_route(route_path);
  auto agent = make_agent(agent_spec);
  const auto r = drive(*agent, route, mode, seed, dt);
  const json res = result_json(route, r);
  if (!log_dir.empty()) {
    fs::create_directories(log_dir);
    std::ofstream trace(fs::path(log_dir) / "trace.jsonl");
    for (const auto& rec : r.trace) trace << evaluation::to_json(rec).dump() << "\n";
    std::ofstream out(fs::path(log_dir) / "result.json");
    out << res.dump(2) << "\n";
  }
  std::cout << res.dump(2) << "\n";
  return 0;
}

std::map<std::string, std::vector<double>> read_loss_curves(const fs::path& metrics) {
  std::map<std::string, std::vector<double>> series;
  std::ifstream in(metrics);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto js = json::parse(line);
    series["train_loss"].push_back(js.at("train_loss").get<double>());
    series["val_loss"].push_back(js.at("val_loss").get<double>());
  }
  return series;
}

int eval(const std::string& data, const std::string& ckpt, const std::vector<std::string>& routes,
         const std::string& mode, std::uint64_t seed, const std::string& out_path, const std::string& plots) {
  auto loaded = training::load_model(ckpt);
  json report;
  const auto samples = training::load_dataset(data);
  const auto m = training::evaluate_task_metrics(loaded.model, samples);
  report["task_metrics"] = {{"Acc_TL", m.acc_tl}, {"MAE_SP", m.mae_sp}, {"BCE_SEG", m.bce_seg},
                            {"MAE_WP", m.mae_wp}, {"MAE_ST", m.mae_st}, {"MAE_TH", m.mae_th},
                            {"MAE_BR", m.mae_br}, {"samples", m.samples}};
  if (!plots.empty()) fs::create_directories(plots);

  std::vector<evaluation::RouteResult> results;
  report["routes"] = json::array();
  for (const auto& path : routes) {
    const auto route = evaluation::load_route(path);
    model::ModelAgent agent(loaded.model);
    const auto r = drive(agent, route, mode, seed, 0.05);
    results.push_back(r.result);
    report["routes"].push_back(result_json(route, r));
    if (!plots.empty()) {
      tools::plot_trajectory(route, r.path, (fs::path(plots) / (route.name() + "_trajectory.png")).string());
    }
  }
  if (!results.empty()) {
    report["DS"] = evaluation::driving_score(results);
    report["RC"] = evaluation::mean_route_completion(results);
    report["IP"] = evaluation::mean_infraction_penalty(results);
  }
  const auto metrics = fs::path(ckpt).parent_path() / "metrics.jsonl";
  if (!plots.empty() && fs::exists(metrics)) {
    tools::plot_curves(read_loss_curves(metrics), (fs::path(plots) / "loss_curves.png").string());
  }
  if (out_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    out << report.dump(2) << "\n";
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_allocator();
  CLI::App app{"fusedrive: RGB-D driving pipeline on a synthetic toy world"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Intra-op threads for tensor math (1 keeps runs bit-reproducible)")
      ->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen-data", "Render a synthetic labelled dataset");
  std::string scenario = "all", gen_out;
  int count = 0;
  std::uint64_t gen_seed = 0;
  gen->add_option("--scenario", scenario, "straight | turn | red_light | lead_vehicle | all");
  gen->add_option("--count", count, "Number of samples")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Seed of the first sample");
  gen->add_option("--out", gen_out, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train a model");
  TrainArgs ta;
  tr->add_option("--config", ta.config, "Run config (YAML)")->required()->check(CLI::ExistingFile);
  tr->add_option("--data", ta.data, "Dataset directory")->required();
  tr->add_option("--out", ta.out, "Output directory for checkpoints and metrics")->required();
  tr->add_flag("--no-sdc-sides", ta.no_sdc_sides, "Drop the side cameras from the BEV map");
  tr->add_flag("--no-cvt", ta.no_cvt, "Use the CNN image encoder instead of the transformer");
  tr->add_flag("--no-vc", ta.no_vc, "Remove the learned control path (PID only)");
  tr->add_flag("--resume", ta.resume, "Continue from <out>/last.pt if present");
  tr->add_option("--max-epochs", ta.max_epochs, "Override the epoch limit");

  auto* sim = app.add_subcommand("simulate", "Drive one route in closed loop");
  std::string route, agent = "expert", mode = "normal", log_dir;
  std::uint64_t sim_seed = 0;
  double dt = 0.05;
  sim->add_option("--route", route, "Route file (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--agent", agent, "expert | model:<checkpoint>");
  sim->add_option("--mode", mode, "normal | adversarial");
  sim->add_option("--seed", sim_seed, "Scene and scenario seed");
  sim->add_option("--log", log_dir, "Directory for trace.jsonl and result.json");
  sim->add_option("--dt", dt, "Simulation step in seconds");

  auto* ev = app.add_subcommand("eval", "Task metrics on a dataset plus closed-loop driving scores");
  std::string ev_data, ckpt, ev_out, plots, ev_mode = "normal";
  std::vector<std::string> routes;
  std::uint64_t ev_seed = 0;
  ev->add_option("--data", ev_data, "Dataset directory")->required();
  ev->add_option("--ckpt", ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--routes", routes, "Route files to drive")->check(CLI::ExistingFile);
  ev->add_option("--mode", ev_mode, "normal | adversarial");
  ev->add_option("--seed", ev_seed, "Scene seed for the routes");
  ev->add_option("--out", ev_out, "Report path (default: stdout)");
  ev->add_option("--plots", plots, "Directory for trajectory and loss-curve images");

  CLI11_PARSE(app, argc, argv);
  torch::set_num_threads(threads);

  try {
    if (*gen) return gen_data(scenario, count, gen_seed, gen_out);
    if (*tr) return train(ta);
    if (*sim) return simulate(route, agent, mode, sim_seed, log_dir, dt);
    if (*ev) return eval(ev_data, ckpt, routes, ev_mode, ev_seed, ev_out, plots);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "torch_doctest.hpp"

#include <cmath>
#include <filesystem>
#include <numeric>

#include <torch/torch.h>

#include "fusedrive/training/losses.hpp"
#include "fusedrive/training/synthetic.hpp"
#include "fusedrive/training/trainer.hpp"

using namespace fusedrive;
using namespace fusedrive::training;
namespace fs = std::filesystem;

namespace {

std::vector<TensorSample> tiny_dataset(int n) {
  std::vector<TensorSample> out;
  const auto scenarios = all_scenarios();
  for (int i = 0; i < n; ++i) {
    out.push_back(to_tensors(generate_synthetic_sample(300 + i, scenarios[i % scenarios.size()])));
  }
  return out;
}

model::RunConfig tiny_run() {
  model::RunConfig cfg;
  cfg.model = model::ModelConfig::toy();
  cfg.train.batch_size = 2;
  cfg.train.steps_per_epoch = 1;
  cfg.train.max_epochs = 3;
  cfg.train.seed = 5;
  return cfg;
}

std::vector<torch::Tensor> snapshot(model::DrivingModel& m) {
  std::vector<torch::Tensor> out;
  for (const auto& p : m->parameters()) out.push_back(p.detach().clone());
  return out;
}

}  // namespace

TEST_CASE("segmentation loss: perfect prediction and the 2x2 hand case") {
  const auto y = torch::tensor({{1.0, 0.0}, {0.0, 1.0}}, torch::kFloat64);
  CHECK(std::abs(seg_loss(y, y).item<double>()) < 1e-6);

  const auto ones = torch::ones({1, 1, 2, 2}, torch::kFloat64);
  const auto half = torch::full({1, 1, 2, 2}, 0.5, torch::kFloat64);
  const double expected = std::log(2.0) + 1.0 / 3.0;
  CHECK(seg_loss(half, ones).item<double>() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(seg_loss(half, ones).item<double>() - 1.0265) < 1e-3);
  CHECK(dice_loss(torch::zeros({2, 2}), torch::zeros({2, 2})).item<double>() == 0.0);
}

TEST_CASE("logit and probability forms of the segmentation loss agree") {
  torch::manual_seed(31);
  const auto logits = torch::randn({2, 4, 6, 5}, torch::kFloat64) * 6.0;
  const auto pred = torch::sigmoid(logits);
  const auto gt = (torch::rand({2, 4, 6, 5}, torch::kFloat64) > 0.7).to(torch::kFloat64);
  const double a = seg_loss(pred, gt).item<double>();
  const double b = seg_loss_from_logits(logits, pred, gt).item<double>();
  CHECK(a == doctest::Approx(b).epsilon(1e-9));

  // Saturated logits hit the same clamp as the probability form.
  const auto sat = torch::full({1, 1, 1, 2}, 60.0, torch::kFloat64);
  const auto zero = torch::zeros({1, 1, 1, 2}, torch::kFloat64);
  const double clamp_bce = -std::log(1e-7);
  CHECK(bce(torch::sigmoid(sat), zero).item<double>() == doctest::Approx(clamp_bce).epsilon(1e-6));
  CHECK(seg_loss_from_logits(sat, torch::sigmoid(sat), zero).item<double>() ==
        doctest::Approx(clamp_bce + 1.0).epsilon(1e-6));
}

TEST_CASE("L1 terms and total-loss linearity") {
  const auto p = torch::tensor({1.0, 2.0, 3.0}, torch::kFloat64);
  const auto g = torch::tensor({1.5, 2.0, 1.0}, torch::kFloat64);
  CHECK(task_l1(p, g).item<double>() == doctest::Approx(2.5 / 3.0));
  const auto wp = torch::zeros({1, 3, 2}, torch::kFloat64);
  auto wg = wp.clone();
  wg[0][1][0] = 3.0;
  CHECK(waypoint_l1(wp, wg).item<double>() == doctest::Approx(0.5));

  torch::manual_seed(32);
  TaskLosses losses;
  std::array<double, kNumTasks> values{};
  LossWeights w{}, v{};
  for (int k = 0; k < kNumTasks; ++k) {
    values[k] = torch::rand({1}, torch::kFloat64).item<double>();
    losses[k] = torch::tensor(values[k], torch::kFloat64);
    w[k] = 0.1 + k;
    v[k] = 2.0 - 0.2 * k;
  }
  LossWeights sum{};
  for (int k = 0; k < kNumTasks; ++k) sum[k] = 1.5 * w[k] + v[k];
  const double lhs = total_loss(losses, sum).item<double>();
  const double rhs = 1.5 * total_loss(losses, w).item<double>() + total_loss(losses, v).item<double>();
  CHECK(std::abs(lhs - rhs) < 1e-12);
  CHECK(std::abs(total_loss(values, w) - total_loss(losses, w).item<double>()) < 1e-12);
}

TEST_CASE("optimizer probes") {
  SUBCASE("a quadratic bowl converges") {
    auto x = torch::tensor({3.0, -2.0}, torch::dtype(torch::kFloat64).requires_grad(true));
    auto opt = make_optimizer({x}, 0.1, 0.0);
    for (int i = 0; i < 500; ++i) {
      opt->zero_grad();
      (x - torch::tensor({1.0, 0.5}, torch::kFloat64)).pow(2).sum().backward();
      opt->step();
    }
    CHECK(x[0].item<double>() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(x[1].item<double>() == doctest::Approx(0.5).epsilon(1e-3));
  }
  SUBCASE("zero gradient without decay leaves parameters unchanged") {
    auto x = torch::tensor({1.0, 2.0}, torch::dtype(torch::kFloat64).requires_grad(true));
    auto opt = make_optimizer({x}, 0.1, 0.0);
    x.mutable_grad() = torch::zeros_like(x);
    opt->step();
    CHECK(torch::equal(x.detach(), torch::tensor({1.0, 2.0}, torch::kFloat64)));
  }
  SUBCASE("decoupled decay shrinks by 1 - lr * wd") {
    auto x = torch::tensor({1.0, -4.0}, torch::dtype(torch::kFloat64).requires_grad(true));
    auto opt = make_optimizer({x}, 1e-2, 0.001);
    x.mutable_grad() = torch::zeros_like(x);
    opt->step();
    CHECK(x[1].item<double>() == doctest::Approx(-4.0 * (1.0 - 1e-2 * 0.001)).epsilon(1e-12));
  }
}

TEST_CASE("trainer keeps the loss weights normalized and resumes exactly") {
  const auto data = tiny_dataset(4);
  const auto dir = fs::temp_directory_path() / "fusedrive_trainer_test";
  fs::remove_all(dir);

  Trainer straight(tiny_run(), data, data);
  const auto recs = straight.run();
  REQUIRE(recs.size() == 3);
  CHECK(recs.back().stop);
  for (const auto& r : recs) {
    CHECK(std::accumulate(r.weights.begin(), r.weights.end(), 0.0) == doctest::Approx(8.0).epsilon(1e-9));
    for (double w : r.weights) CHECK(w > 0.0);
    CHECK(std::isfinite(r.train_loss));
  }
  CHECK(straight.step() == 3);

  Trainer first(tiny_run(), data, data);
  first.run(dir.string(), 1);
  CHECK(fs::exists(dir / "last.pt"));
  CHECK(fs::exists(dir / "metrics.jsonl"));
  Trainer resumed(tiny_run(), data, data);
  resumed.load_checkpoint((dir / "last.pt").string());
  CHECK(resumed.epoch() == 1);
  const auto rest = resumed.run(dir.string());
  CHECK(rest.size() == 2);

  const auto a = snapshot(straight.model());
  const auto b = snapshot(resumed.model());
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).abs().max().item<double>());
  CHECK(worst < 1e-6);
  for (int k = 0; k < kNumTasks; ++k) CHECK(straight.weights()[k] == doctest::Approx(resumed.weights()[k]));

  const auto loaded = load_model((dir / "best.pt").string());
  CHECK(model::to_yaml(loaded.config) == model::to_yaml(tiny_run()));
}

TEST_CASE("ablations change the architecture and still train") {
  const auto data = tiny_dataset(2);
  SUBCASE("no_vc drops the learned control path and its losses") {
    auto cfg = tiny_run();
    cfg.model.ablations.no_vc = true;
    cfg.train.max_epochs = 1;
    Trainer t(cfg, data, data);
    CHECK(t.model()->dynamic_branch.is_empty());
    CHECK_FALSE(t.model()->has_control_path());
    const auto recs = t.run();
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].task_losses[kSteer] == 0.0);
    CHECK(recs[0].weights[kSteer] == 1.0);
  }
  SUBCASE("no_sdc_sides leaves only the front camera in the BEV map") {
    auto cfg = tiny_run();
    cfg.model.ablations.no_sdc_sides = true;
    auto m = model::make_model(cfg.model, 3);
    m->eval();
    torch::NoGradGuard ng;
    const auto batch = make_batch(data, {0}, 23);
    const auto seg = torch::zeros({1, 23, 160, 768});
    seg.select(1, 7).fill_(1.0);
    const auto sdc = m->build_sdc(seg, batch.input.depth);
    const int merged = cfg.model.sdc.merged_cols;
    const int front = cfg.model.sdc.front_cols;
    const int lo = (merged - front) / 2;
    CHECK(sdc.slice(3, 0, lo).sum().item<double>() == 0.0);
    CHECK(sdc.slice(3, lo + front, merged).sum().item<double>() == 0.0);
    CHECK(sdc.slice(3, lo, lo + front).sum().item<double>() > 0.0);
  }
}

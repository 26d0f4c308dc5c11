#include "fusedrive/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "fusedrive/common/errors.hpp"
#include "fusedrive/model/tensors.hpp"

namespace fusedrive::training {

namespace fs = std::filesystem;

TensorSample to_tensors(const Sample& s) {
  TensorSample t;
  t.rgb = model::image_to_tensor(s.rgb);
  t.depth = model::depth_to_tensor(geometry::decode_depth(s.depth));
  t.seg = torch::empty({s.seg.rows(), s.seg.cols()}, torch::kInt64);
  auto* p = t.seg.data_ptr<int64_t>();
  for (std::int32_t v : s.seg.data()) *p++ = v;
  t.measurement = model::measurement_to_tensor(s.measurement());
  t.controls = torch::tensor({s.controls.steering, s.controls.throttle, s.controls.brake}, torch::kFloat32);
  t.waypoints = torch::empty({3, 2}, torch::kFloat32);
  for (int i = 0; i < 3; ++i) {
    t.waypoints[i][0] = static_cast<float>(s.waypoints.points[i].x);
    t.waypoints[i][1] = static_cast<float>(s.waypoints.points[i].y);
  }
  t.traffic_light = s.traffic_light;
  t.stop_sign = s.stop_sign;
  t.speed = s.speed;
  return t;
}

std::vector<TensorSample> load_dataset(const std::string& root) {
  std::vector<TensorSample> out;
  for (const auto& dir : list_samples(root)) out.push_back(to_tensors(read_sample(dir)));
  return out;
}

Batch make_batch(const std::vector<TensorSample>& samples, const std::vector<std::size_t>& indices,
                 int num_classes, torch::Dtype dtype) {
  if (indices.empty()) throw InvalidInput("make_batch: empty batch");
  std::vector<torch::Tensor> rgb, depth, seg, meas, ctl, wp;
  std::vector<double> tl, ss, sp;
  for (std::size_t i : indices) {
    const auto& s = samples.at(i);
    rgb.push_back(s.rgb);
    depth.push_back(s.depth);
    seg.push_back(s.seg);
    meas.push_back(s.measurement);
    ctl.push_back(s.controls);
    wp.push_back(s.waypoints);
    tl.push_back(s.traffic_light);
    ss.push_back(s.stop_sign);
    sp.push_back(s.speed);
  }
  const auto opts = torch::TensorOptions().dtype(dtype);
  Batch b;
  b.input.rgb = torch::stack(rgb).to(dtype);
  b.input.depth = torch::stack(depth);
  b.input.measurement = torch::stack(meas).to(dtype);
  const auto labels = torch::stack(seg).unsqueeze(1);
  b.targets.seg = torch::zeros({labels.size(0), num_classes, labels.size(2), labels.size(3)}, opts)
                      .scatter_(1, labels, 1.0);
  b.targets.controls = torch::stack(ctl).to(dtype);
  b.targets.waypoints = torch::stack(wp).to(dtype);
  b.targets.traffic_light = torch::tensor(tl, opts);
  b.targets.stop_sign = torch::tensor(ss, opts);
  b.targets.speed = torch::tensor(sp, opts);
  return b;
}

std::unique_ptr<torch::optim::AdamW> make_optimizer(const std::vector<torch::Tensor>& params, double lr,
                                                    double weight_decay) {
  return std::make_unique<torch::optim::AdamW>(
      params, torch::optim::AdamWOptions(lr).weight_decay(weight_decay));
}

std::string to_json_line(const EpochRecord& rec) {
  nlohmann::json losses, weights;
  for (int i = 0; i < kNumTasks; ++i) {
    losses[task_names()[i]] = rec.task_losses[i];
    weights[task_names()[i]] = rec.weights[i];
  }
  const nlohmann::json js = {{"epoch", rec.epoch},       {"step", rec.step},
                             {"lr", rec.lr},             {"train_loss", rec.train_loss},
                             {"val_loss", rec.val_loss}, {"task_losses", losses},
                             {"weights", weights},       {"stop", rec.stop}};
  return js.dump();
}

void split_dataset(std::vector<TensorSample> all, double val_fraction, std::vector<TensorSample>& train,
                   std::vector<TensorSample>& val) {
  const auto n = all.size();
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_fraction));
  if (n_val == 0 || n_val >= n) {
    train = all;
    val = std::move(all);
    return;
  }
  train.assign(all.begin(), all.end() - static_cast<std::ptrdiff_t>(n_val));
  val.assign(all.end() - static_cast<std::ptrdiff_t>(n_val), all.end());
}

Trainer::Trainer(model::RunConfig cfg, std::vector<TensorSample> train, std::vector<TensorSample> val)
    : cfg_(std::move(cfg)), train_(std::move(train)), val_(std::move(val)) {
  if (train_.empty()) throw InvalidInput("Trainer: empty training set");
  if (val_.empty()) val_ = train_;
  model_ = model::make_model(cfg_.model, cfg_.train.seed);
  optimizer_ = make_optimizer(model_->parameters(), cfg_.train.schedule.initial_lr, cfg_.train.weight_decay);
  weights_.fill(1.0);
  schedule_ = make_lr_state(cfg_.train.schedule);
}

std::array<double, kNumTasks> Trainer::evaluate(const std::vector<TensorSample>& samples) {
  torch::NoGradGuard no_grad;
  model_->eval();
  std::array<double, kNumTasks> sum{};
  const int bs = cfg_.train.batch_size;
  for (std::size_t start = 0; start < samples.size(); start += bs) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(samples.size(), start + bs); ++i) idx.push_back(i);
    const auto batch = make_batch(samples, idx, cfg_.model.sdc.num_classes);
    const auto losses = compute_task_losses(model_->forward(batch.input), batch.targets);
    for (int k = 0; k < kNumTasks; ++k) sum[k] += losses[k].item<double>() * static_cast<double>(idx.size());
  }
  for (auto& v : sum) v /= static_cast<double>(samples.size());
  return sum;
}

double Trainer::validation_loss() { return total_loss(evaluate(val_), weights_); }

std::array<double, kNumTasks> Trainer::train_epoch() {
  model_->train();
  const std::size_t n = train_.size();
  const int bs = std::min<int>(cfg_.train.batch_size, static_cast<int>(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg_.train.seed * 1000003ull + static_cast<std::uint64_t>(epoch_));
  std::shuffle(order.begin(), order.end(), rng);

  const int batches = cfg_.train.steps_per_epoch > 0
                          ? cfg_.train.steps_per_epoch
                          : static_cast<int>((n + static_cast<std::size_t>(bs) - 1) / bs);
  std::array<double, kNumTasks> sum{};
  int done = 0;
  std::size_t cursor = 0;
  for (int b = 0; b < batches; ++b) {
    if (cfg_.train.max_steps > 0 && step_ >= cfg_.train.max_steps) break;
    std::vector<std::size_t> idx;
    for (int i = 0; i < bs; ++i) {
      if (cursor == n) {
        cursor = 0;
        std::shuffle(order.begin(), order.end(), rng);
      }
      idx.push_back(order[cursor++]);
      if (cfg_.train.steps_per_epoch == 0 && cursor == n) break;
    }
    const auto batch = make_batch(train_, idx, cfg_.model.sdc.num_classes);
    const auto out = model_->forward(batch.input);
    const auto losses = compute_task_losses(out, batch.targets);
    if (!have_initial_) {
      for (int k = 0; k < kNumTasks; ++k) initial_losses_[k] = losses[k].item<double>();
      have_initial_ = true;
    }
    const auto total = total_loss(losses, weights_);
    optimizer_->zero_grad();
    total.backward();
    optimizer_->step();
    ++step_;
    ++done;
    for (int k = 0; k < kNumTasks; ++k) sum[k] += losses[k].item<double>();
  }
  if (done > 0) {
    for (auto& v : sum) v /= done;
  }
  return sum;
}

void Trainer::update_weights() {
  if (!cfg_.train.mgn) return;
  model_->train();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < std::min<std::size_t>(train_.size(), cfg_.train.batch_size); ++i) idx.push_back(i);
  const auto batch = make_batch(train_, idx, cfg_.model.sdc.num_classes);
  const auto out = model_->forward(batch.input);
  const auto losses = compute_task_losses(out, batch.targets);
  const auto shared = model_->shared_parameters();
  const auto active = active_tasks(cfg_.model);

  std::vector<double> norms(kNumTasks, 0.0), current(kNumTasks, 0.0), initial(kNumTasks, 0.0);
  std::vector<double> w(weights_.begin(), weights_.end());
  std::vector<bool> mask(active.begin(), active.end());
  for (int k = 0; k < kNumTasks; ++k) {
    current[k] = losses[k].item<double>();
    initial[k] = initial_losses_[k];
    if (!active[k]) continue;
    const auto grads = torch::autograd::grad({losses[k]}, shared, {}, /*retain_graph=*/true,
                                             /*create_graph=*/false, /*allow_unused=*/true);
    double sq = 0.0;
    for (const auto& g : grads) {
      if (g.defined()) sq += g.pow(2).sum().item<double>();
    }
    norms[k] = std::sqrt(sq);
    // A task that currently sends no gradient cannot be balanced this epoch.
    if (!(norms[k] > 0.0) || !std::isfinite(norms[k])) return;
  }
  const auto ratios = loss_ratios(current, initial);
  for (int k = 0; k < kNumTasks; ++k) {
    if (mask[k] && !(ratios[k] > 0.0)) return;
  }
  const auto updated = mgn_update(w, norms, ratios, cfg_.train.mgn_config, mask);
  std::copy(updated.begin(), updated.end(), weights_.begin());
}

std::vector<EpochRecord> Trainer::run(const std::string& out_dir, int epoch_limit) {
  std::vector<EpochRecord> records;
  if (finished_) return records;
  if (!out_dir.empty()) fs::create_directories(out_dir);
  if (!baseline_done_) {
    observe_baseline(schedule_, validation_loss());
    baseline_done_ = true;
  }
  int ran = 0;
  while (!finished_ && (epoch_limit == 0 || ran < epoch_limit)) {
    const auto train_losses = train_epoch();
    ++epoch_;
    ++ran;
    const double val = validation_loss();
    const auto decision = lr_schedule(schedule_, val, cfg_.train.schedule);
    for (auto& group : optimizer_->param_groups()) {
      static_cast<torch::optim::AdamWOptions&>(group.options()).lr(decision.lr);
    }
    update_weights();

    EpochRecord rec;
    rec.epoch = epoch_;
    rec.step = step_;
    rec.lr = decision.lr;
    rec.task_losses = train_losses;
    rec.train_loss = std::accumulate(train_losses.begin(), train_losses.end(), 0.0);
    rec.val_loss = val;
    rec.weights = weights_;
    const bool out_of_steps = cfg_.train.max_steps > 0 && step_ >= cfg_.train.max_steps;
    rec.stop = decision.stop || out_of_steps || epoch_ >= cfg_.train.max_epochs;
    finished_ = rec.stop;
    records.push_back(rec);

    if (!out_dir.empty()) {
      std::ofstream log(fs::path(out_dir) / "metrics.jsonl", std::ios::app);
      log << to_json_line(rec) << '\n';
      if (val < best_val_) {
        best_val_ = val;
        save_checkpoint((fs::path(out_dir) / "best.pt").string());
      }
      save_checkpoint((fs::path(out_dir) / "last.pt").string());
    } else if (val < best_val_) {
      best_val_ = val;
    }
  }
  return records;
}

namespace {

torch::Tensor doubles(const std::vector<double>& v) { return torch::tensor(v, torch::kFloat64); }

}  // namespace

void Trainer::save_checkpoint(const std::string& path) {
  torch::serialize::OutputArchive ar;
  torch::serialize::OutputArchive model_ar;
  model_->save(model_ar);
  ar.write("model", model_ar);
  torch::serialize::OutputArchive optim_ar;
  optimizer_->save(optim_ar);
  ar.write("optimizer", optim_ar);
  ar.write("config", c10::IValue(model::to_yaml(cfg_)));
  ar.write("config_hash", c10::IValue(static_cast<int64_t>(model::config_hash(cfg_))));
  ar.write("weights", doubles({weights_.begin(), weights_.end()}));
  ar.write("initial_losses", doubles({initial_losses_.begin(), initial_losses_.end()}));
  ar.write("schedule", doubles({schedule_.lr, schedule_.best, best_val_}));
  ar.write("counters", torch::tensor({static_cast<int64_t>(step_), static_cast<int64_t>(epoch_),
                                      static_cast<int64_t>(have_initial_), static_cast<int64_t>(baseline_done_),
                                      static_cast<int64_t>(finished_), static_cast<int64_t>(schedule_.epoch),
                                      static_cast<int64_t>(schedule_.since_best),
                                      static_cast<int64_t>(schedule_.since_reduce)},
                                     torch::kInt64));
  ar.save_to(path);
}

namespace {

model::RunConfig read_config(torch::serialize::InputArchive& ar) {
  c10::IValue text;
  ar.read("config", text);
  return model::parse_run_config(text.toStringRef());
}

}  // namespace

void Trainer::load_checkpoint(const std::string& path) {
  torch::serialize::InputArchive ar;
  try {
    ar.load_from(path);
  } catch (const c10::Error& e) {
    throw IoError("cannot read checkpoint " + path + ": " + e.what_without_backtrace());
  }
  if (model::config_hash(read_config(ar)) != model::config_hash(cfg_)) {
    throw ConfigError("checkpoint " + path + " was written with a different run config");
  }
  torch::serialize::InputArchive model_ar;
  ar.read("model", model_ar);
  model_->load(model_ar);
  torch::serialize::InputArchive optim_ar;
  ar.read("optimizer", optim_ar);
  optimizer_->load(optim_ar);

  torch::Tensor w, init, sched, counters;
  ar.read("weights", w);
  ar.read("initial_losses", init);
  ar.read("schedule", sched);
  ar.read("counters", counters);
  for (int k = 0; k < kNumTasks; ++k) {
    weights_[k] = w[k].item<double>();
    initial_losses_[k] = init[k].item<double>();
  }
  schedule_.lr = sched[0].item<double>();
  schedule_.best = sched[1].item<double>();
  best_val_ = sched[2].item<double>();
  step_ = counters[0].item<int64_t>();
  epoch_ = static_cast<int>(counters[1].item<int64_t>());
  have_initial_ = counters[2].item<int64_t>() != 0;
  baseline_done_ = counters[3].item<int64_t>() != 0;
  finished_ = counters[4].item<int64_t>() != 0;
  schedule_.epoch = static_cast<int>(counters[5].item<int64_t>());
  schedule_.since_best = static_cast<int>(counters[6].item<int64_t>());
  schedule_.since_reduce = static_cast<int>(counters[7].item<int64_t>());
  for (auto& group : optimizer_->param_groups()) {
    static_cast<torch::optim::AdamWOptions&>(group.options()).lr(schedule_.lr);
  }
}

LoadedModel load_model(const std::string& checkpoint) {
  torch::serialize::InputArchive ar;
  try {
    ar.load_from(checkpoint);
  } catch (const c10::Error& e) {
    throw IoError("cannot read checkpoint " + checkpoint + ": " + e.what_without_backtrace());
  }
  LoadedModel out;
  out.config = read_config(ar);
  out.model = model::DrivingModel(out.config.model);
  torch::serialize::InputArchive model_ar;
  ar.read("model", model_ar);
  out.model->load(model_ar);
  out.model->eval();
  return out;
}

}  // namespace fusedrive::training

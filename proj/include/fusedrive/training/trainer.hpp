#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "fusedrive/model/config.hpp"
#include "fusedrive/model/driving_model.hpp"
#include "fusedrive/training/losses.hpp"
#include "fusedrive/training/sample.hpp"
#include "fusedrive/training/schedule.hpp"

namespace fusedrive::training {

// A sample converted to tensors once, kept compact in memory.
struct TensorSample {
  torch::Tensor rgb;          // 3 x H x W float
  torch::Tensor depth;        // H x W double, meters
  torch::Tensor seg;          // H x W int64 class ids
  torch::Tensor measurement;  // 9
  torch::Tensor controls;     // 3
  torch::Tensor waypoints;    // 3 x 2
  double traffic_light = 0.0;
  double stop_sign = 0.0;
  double speed = 0.0;
};

TensorSample to_tensors(const Sample& s);
std::vector<TensorSample> load_dataset(const std::string& root);

struct Batch {
  model::ModelInput input;
  Targets targets;
};

Batch make_batch(const std::vector<TensorSample>& samples, const std::vector<std::size_t>& indices,
                 int num_classes, torch::Dtype dtype = torch::kFloat32);

// Adam with decoupled weight decay.
std::unique_ptr<torch::optim::AdamW> make_optimizer(const std::vector<torch::Tensor>& params,
                                                    double lr, double weight_decay = 0.001);

struct EpochRecord {
  int epoch = 0;
  std::int64_t step = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::array<double, kNumTasks> task_losses{};  // unweighted training means
  std::array<double, kNumTasks> weights{};      // weights in force for the next epoch
  bool stop = false;
};

std::string to_json_line(const EpochRecord& rec);

class Trainer {
 public:
  Trainer(model::RunConfig cfg, std::vector<TensorSample> train, std::vector<TensorSample> val);

  // Train until the schedule stops, max_epochs or max_steps is reached, or
  // `epoch_limit` more epochs have run (0 = no limit). When `out_dir` is
  // set, writes last.pt, best.pt and appends metrics.jsonl there.
  std::vector<EpochRecord> run(const std::string& out_dir = "", int epoch_limit = 0);

  // Mean task losses over a sample set in eval mode.
  std::array<double, kNumTasks> evaluate(const std::vector<TensorSample>& samples);
  double validation_loss();

  void save_checkpoint(const std::string& path);
  // Restore model, optimizer, loss weights and schedule to continue training.
  void load_checkpoint(const std::string& path);

  model::DrivingModel& model() { return model_; }
  const LossWeights& weights() const { return weights_; }
  std::int64_t step() const { return step_; }
  int epoch() const { return epoch_; }
  bool finished() const { return finished_; }
  const model::RunConfig& config() const { return cfg_; }

 private:
  std::array<double, kNumTasks> train_epoch();
  void update_weights();

  model::RunConfig cfg_;
  std::vector<TensorSample> train_;
  std::vector<TensorSample> val_;
  model::DrivingModel model_{nullptr};
  std::unique_ptr<torch::optim::AdamW> optimizer_;
  LossWeights weights_;
  std::array<double, kNumTasks> initial_losses_{};
  bool have_initial_ = false;
  LrScheduleState schedule_;
  bool baseline_done_ = false;
  double best_val_ = std::numeric_limits<double>::infinity();
  std::int64_t step_ = 0;
  int epoch_ = 0;
  bool finished_ = false;
};

// Split a dataset deterministically: the last round(n * fraction) samples
// are held out. A zero fraction validates on the training set.
void split_dataset(std::vector<TensorSample> all, double val_fraction, std::vector<TensorSample>& train,
                   std::vector<TensorSample>& val);

// Model and run config stored in a checkpoint.
struct LoadedModel {
  model::RunConfig config;
  model::DrivingModel model{nullptr};
};
LoadedModel load_model(const std::string& checkpoint);

}  // namespace fusedrive::training

#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace fusedrive::training {

struct MgnConfig {
  double gamma = 1.5;  // strength of the pull toward slower-training tasks
  double rate = 0.5;   // exponent of the multiplicative step
  double total = 8.0;  // weights are renormalized to this sum
  // A task whose loss has saturated has a near-zero gradient norm, and the
  // unbounded update then pours all weight into it. Each step's factor is
  // limited to [1/max_step, max_step] and no active weight drops below
  // min_weight.
  double max_step = 2.0;
  double min_weight = 0.05;
};

// Relative inverse training rates L_i(t) / L_i(0). A task whose initial
// loss is zero is pinned at 1.
std::vector<double> loss_ratios(const std::vector<double>& current, const std::vector<double>& initial);

// One gradient-normalization step over the tasks with `active[i]` set.
// With G_i = w_i * g_i and target T_i = mean(G) * (r_i / mean(r))^gamma,
// each active weight is scaled by (T_i / G_i)^rate, clamped to the step
// bound. Inactive tasks keep weight 1 and the active ones are rescaled so
// that the sum is `total`, lifting any below the floor.
// An empty `active` means every task is active.
std::vector<double> mgn_update(const std::vector<double>& weights, const std::vector<double>& grad_norms,
                               const std::vector<double>& ratios, const MgnConfig& cfg = {},
                               const std::vector<bool>& active = {});

struct LrScheduleConfig {
  double initial_lr = 1e-4;
  double factor = 0.5;
  int patience = 3;        // flat epochs before the rate is reduced
  int stop_patience = 15;  // flat epochs before training halts
  int max_epochs = 40;
};

struct LrScheduleState {
  double lr = 1e-4;
  int epoch = 0;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  int since_reduce = 0;
};

struct LrDecision {
  double lr = 0.0;  // rate for the next epoch
  bool stop = false;
};

LrScheduleState make_lr_state(const LrScheduleConfig& cfg);
// Record the validation metric measured before the first epoch.
void observe_baseline(LrScheduleState& state, double val_metric);
// Record the validation metric at the end of an epoch.
LrDecision lr_schedule(LrScheduleState& state, double val_metric, const LrScheduleConfig& cfg);

}  // namespace fusedrive::training

#include "fusedrive/training/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::training {

std::vector<double> loss_ratios(const std::vector<double>& current, const std::vector<double>& initial) {
  if (current.size() != initial.size()) throw InvalidInput("loss_ratios: size mismatch");
  std::vector<double> out(current.size(), 1.0);
  for (std::size_t i = 0; i < current.size(); ++i) {
    if (initial[i] > 0.0) out[i] = current[i] / initial[i];
  }
  return out;
}

std::vector<double> mgn_update(const std::vector<double>& weights, const std::vector<double>& grad_norms,
                               const std::vector<double>& ratios, const MgnConfig& cfg,
                               const std::vector<bool>& active) {
  const std::size_t n = weights.size();
  if (grad_norms.size() != n || ratios.size() != n || (!active.empty() && active.size() != n)) {
    throw InvalidInput("mgn_update: size mismatch");
  }
  auto is_active = [&](std::size_t i) { return active.empty() || active[i]; };

  std::vector<double> g(n, 0.0);
  double mean_g = 0.0;
  double mean_r = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_active(i)) continue;
    if (!(weights[i] > 0.0) || !(grad_norms[i] > 0.0) || !(ratios[i] > 0.0)) {
      throw InvalidInput("mgn_update: weights, gradient norms and ratios must be positive");
    }
    g[i] = weights[i] * grad_norms[i];
    mean_g += g[i];
    mean_r += ratios[i];
    ++count;
  }
  if (count == 0) throw InvalidInput("mgn_update: no active task");
  mean_g /= static_cast<double>(count);
  mean_r /= static_cast<double>(count);

  std::vector<double> out(n, 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_active(i)) continue;
    const double target = mean_g * std::pow(ratios[i] / mean_r, cfg.gamma);
    const double step = std::clamp(std::pow(target / g[i], cfg.rate), 1.0 / cfg.max_step, cfg.max_step);
    out[i] = weights[i] * step;
    sum += out[i];
  }
  const double budget = cfg.total - static_cast<double>(n - count);
  if (!(budget > static_cast<double>(count) * cfg.min_weight)) {
    throw InvalidInput("mgn_update: total too small for the inactive tasks and the weight floor");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (is_active(i)) out[i] *= budget / sum;
  }
  // Pin weights under the floor and rescale the rest; each pass pins at
  // least one more task, so this ends within `count` passes.
  std::vector<bool> pinned(n, false);
  for (std::size_t pass = 0; pass < count; ++pass) {
    double free_sum = 0.0;
    double pinned_sum = 0.0;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_active(i)) continue;
      if (!pinned[i] && out[i] < cfg.min_weight) {
        pinned[i] = true;
        changed = true;
      }
      if (pinned[i]) {
        out[i] = cfg.min_weight;
        pinned_sum += out[i];
      } else {
        free_sum += out[i];
      }
    }
    if (!changed) break;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_active(i) && !pinned[i]) out[i] *= (budget - pinned_sum) / free_sum;
    }
  }
  return out;
}

LrScheduleState make_lr_state(const LrScheduleConfig& cfg) {
  LrScheduleState s;
  s.lr = cfg.initial_lr;
  return s;
}

void observe_baseline(LrScheduleState& state, double val_metric) {
  state.best = val_metric;
  state.since_best = 0;
  state.since_reduce = 0;
}

LrDecision lr_schedule(LrScheduleState& state, double val_metric, const LrScheduleConfig& cfg) {
  ++state.epoch;
  if (val_metric < state.best) {
    state.best = val_metric;
    state.since_best = 0;
    state.since_reduce = 0;
  } else {
    ++state.since_best;
    ++state.since_reduce;
    if (state.since_reduce >= cfg.patience) {
      state.lr *= cfg.factor;
      state.since_reduce = 0;
    }
  }
  const bool stop = state.since_best >= cfg.stop_patience || state.epoch >= cfg.max_epochs;
  return {state.lr, stop};
}

}  // namespace fusedrive::training

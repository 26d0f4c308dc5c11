#include "fusedrive/control/pid.hpp"

#include <numeric>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::control {

void PidState::push(double error) {
  window_.push_back(error);
  while (window_.size() > kWindow) window_.pop_front();
}

void PidState::reset() {
  window_.clear();
  previous_error_ = 0.0;
}

double pid_step(PidState& state, double error, double dt) {
  if (!(dt > 0.0)) throw InvalidInput("pid_step: dt must be positive");
  state.push(error);
  const double integral =
      std::accumulate(state.window_.begin(), state.window_.end(), 0.0) /
      static_cast<double>(state.window_.size());
  const double derivative = (error - state.previous_error_) / dt;
  state.previous_error_ = error;
  const auto& g = state.gains_;
  return g.kp * error + g.ki * integral + g.kd * derivative;
}

}  // namespace fusedrive::control

#pragma once

#include <cstddef>
#include <deque>

namespace fusedrive::control {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;

  // Steering controller.
  static PidGains lateral() { return {1.25, 0.75, 0.3}; }
  // Throttle/brake controller.
  static PidGains longitudinal() { return {5.0, 0.5, 1.0}; }
};

// PID memory: the last 40 errors (integral is their running average) and
// the previous error for the backward-difference derivative.
class PidState {
 public:
  static constexpr std::size_t kWindow = 40;

  PidState() = default;
  explicit PidState(PidGains gains) : gains_(gains) {}

  const PidGains& gains() const { return gains_; }
  const std::deque<double>& window() const { return window_; }
  double previous_error() const { return previous_error_; }

  void push(double error);
  void reset();

 private:
  friend double pid_step(PidState& state, double error, double dt);

  PidGains gains_;
  std::deque<double> window_;
  double previous_error_ = 0.0;
};

// kp*e + ki*mean(window incl. e) + kd*(e - e_prev)/dt, with e_prev = 0 on
// the first call.
double pid_step(PidState& state, double error, double dt);

}  // namespace fusedrive::control

#pragma once

#include "fusedrive/control/pid.hpp"
#include "fusedrive/evaluation/closed_loop.hpp"
#include "fusedrive/model/driving_model.hpp"

namespace fusedrive::model {

// Closed-loop driver backed by the network: PID on the predicted
// waypoints, blended with the learned controls unless the control path is
// ablated.
class ModelAgent : public evaluation::Agent {
 public:
  explicit ModelAgent(DrivingModel model);

  evaluation::AgentOutput step(const evaluation::Observation& obs) override;
  bool needs_sensors() const override { return true; }
  void reset() override;

 private:
  DrivingModel model_;
  control::PidState lateral_;
  control::PidState longitudinal_;
};

}  // namespace fusedrive::model

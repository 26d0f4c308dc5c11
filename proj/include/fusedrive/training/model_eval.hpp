#pragma once

#include <vector>

#include "fusedrive/evaluation/metrics.hpp"
#include "fusedrive/model/driving_model.hpp"
#include "fusedrive/training/trainer.hpp"

namespace fusedrive::training {

// Per-task metrics of a model over a labelled set, in eval mode. Without a
// learned control path the control columns score the PID fallback's
// commands from the predicted waypoints.
evaluation::TaskMetrics evaluate_task_metrics(model::DrivingModel& model,
                                              const std::vector<TensorSample>& samples,
                                              int batch_size = 4);

}  // namespace fusedrive::training

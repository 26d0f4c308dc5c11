#include "fusedrive/model/agent.hpp"

#include "fusedrive/common/errors.hpp"
#include "fusedrive/control/controls.hpp"
#include "fusedrive/model/tensors.hpp"

namespace fusedrive::model {

ModelAgent::ModelAgent(DrivingModel model)
    : model_(std::move(model)),
      lateral_(control::PidGains::lateral()),
      longitudinal_(control::PidGains::longitudinal()) {
  model_->eval();
}

void ModelAgent::reset() {
  lateral_.reset();
  longitudinal_.reset();
}

evaluation::AgentOutput ModelAgent::step(const evaluation::Observation& obs) {
  if (obs.sensors == nullptr) throw InvalidInput("ModelAgent: observation has no sensor frame");
  torch::NoGradGuard no_grad;
  ModelInput in;
  in.rgb = image_to_tensor(obs.sensors->rgb).unsqueeze(0);
  in.depth = depth_to_tensor(geometry::decode_depth(obs.sensors->depth)).unsqueeze(0);
  in.measurement =
      measurement_to_tensor({obs.speed, obs.command, obs.route_point_local}).unsqueeze(0);
  const auto out = model_->forward(in);

  evaluation::AgentOutput result;
  const auto wp = out.waypoints[0].to(torch::kFloat64).contiguous();
  result.waypoints.emplace();
  for (int i = 0; i < control::kNumWaypoints; ++i) {
    result.waypoints->points[i] = {wp[i][0].item<double>(), wp[i][1].item<double>()};
  }
  const auto& cfg = model_->config();
  const auto pid = control::pid_control(*result.waypoints, obs.speed, lateral_, longitudinal_, cfg.pid);
  if (!model_->has_control_path()) {
    result.control = pid;
    return result;
  }
  auto as_array = [](const torch::Tensor& t) {
    const auto d = t[0].to(torch::kFloat64);
    return std::array<double, 3>{d[0].item<double>(), d[1].item<double>(), d[2].item<double>()};
  };
  const auto mlp = control::combine_controls(as_array(out.raw_control), as_array(out.adjustment), cfg.combine);
  result.control = control::control_arbitration(mlp, pid, cfg.arbitration_beta);
  return result;
}

}  // namespace fusedrive::model

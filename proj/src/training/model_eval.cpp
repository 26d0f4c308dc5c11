#include "fusedrive/training/model_eval.hpp"

#include "fusedrive/control/controls.hpp"

namespace fusedrive::training {

evaluation::TaskMetrics evaluate_task_metrics(model::DrivingModel& model,
                                              const std::vector<TensorSample>& samples, int batch_size) {
  torch::NoGradGuard no_grad;
  model->eval();
  const auto& cfg = model->config();
  evaluation::TaskMetricsAccumulator acc;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(samples.size(), start + batch_size); ++i) idx.push_back(i);
    const auto batch = make_batch(samples, idx, cfg.sdc.num_classes);
    const auto out = model->forward(batch.input);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto b = static_cast<int64_t>(j);
      const auto& s = samples[idx[j]];
      evaluation::TaskPrediction pred;
      evaluation::TaskTruth truth;
      pred.traffic_light = out.traffic_light[b].item<double>();
      pred.speed = out.speed[b].item<double>();
      for (int i = 0; i < 3; ++i) {
        pred.waypoints.points[i] = {out.waypoints[b][i][0].item<double>(), out.waypoints[b][i][1].item<double>()};
        truth.waypoints.points[i] = {s.waypoints[i][0].item<double>(), s.waypoints[i][1].item<double>()};
      }
      if (out.controls.defined()) {
        pred.steering = out.controls[b][0].item<double>();
        pred.throttle = out.controls[b][1].item<double>();
        pred.brake = out.controls[b][2].item<double>();
      } else {
        control::PidState lat(control::PidGains::lateral()), lon(control::PidGains::longitudinal());
        const auto cmd = control::pid_control(pred.waypoints, s.speed, lat, lon, cfg.pid);
        pred.steering = cmd.steering;
        pred.throttle = cmd.throttle;
        pred.brake = cmd.brake;
      }
      const auto seg = out.seg[b].contiguous().to(torch::kFloat32);
      pred.segmentation.assign(seg.data_ptr<float>(), seg.data_ptr<float>() + seg.numel());
      const auto gt = batch.targets.seg[b].contiguous().to(torch::kUInt8);
      truth.segmentation.assign(gt.data_ptr<std::uint8_t>(), gt.data_ptr<std::uint8_t>() + gt.numel());
      truth.traffic_light = s.traffic_light >= 0.5 ? 1 : 0;
      truth.speed = s.speed;
      truth.steering = s.controls[0].item<double>();
      truth.throttle = s.controls[1].item<double>();
      truth.brake = s.controls[2].item<double>();
      acc.add(pred, truth);
    }
  }
  return acc.result();
}

}  // namespace fusedrive::training

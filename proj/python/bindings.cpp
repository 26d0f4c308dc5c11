#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fusedrive/common/errors.hpp"
#include "fusedrive/control/controls.hpp"
#include "fusedrive/control/pid.hpp"
#include "fusedrive/evaluation/closed_loop.hpp"
#include "fusedrive/evaluation/metrics.hpp"
#include "fusedrive/evaluation/route.hpp"
#include "fusedrive/geometry/depth.hpp"
#include "fusedrive/geometry/transform.hpp"
#include "fusedrive/training/schedule.hpp"
#include "fusedrive/training/synthetic.hpp"

namespace py = pybind11;
using namespace fusedrive;

namespace {

std::pair<double, double> as_pair(geometry::Vec2 v) { return {v.x, v.y}; }

control::WaypointSet to_waypoints(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() != control::kNumWaypoints) throw InvalidInput("expected 3 waypoints");
  control::WaypointSet w;
  for (std::size_t i = 0; i < pts.size(); ++i) w.points[i] = {pts[i].first, pts[i].second};
  return w;
}

py::dict route_result_dict(const evaluation::RouteResult& r) {
  py::dict d;
  d["route_completion"] = r.route_completion;
  d["infraction_penalty"] = r.infraction_penalty;
  d["driving_score"] = r.driving_score;
  py::list inf;
  for (const auto& e : r.infractions) inf.append(evaluation::to_string(e.type));
  d["infractions"] = inf;
  return d;
}

}  // namespace

PYBIND11_MODULE(_fusedrive, m) {
  m.doc() = "Geometry, control, evaluation and data-generation core of fusedrive";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("decode_depth_value", &geometry::decode_depth_value, py::arg("r"), py::arg("g"), py::arg("b"));
  m.def("encode_depth_value", &geometry::encode_depth_value, py::arg("meters"));

  m.def(
      "global_to_local",
      [](std::pair<double, double> p, std::tuple<double, double, double> pose) {
        const auto [x, y, h] = pose;
        return as_pair(geometry::global_to_local({p.first, p.second}, {x, y, h}));
      },
      py::arg("point"), py::arg("pose"), "Global point to the ego frame; pose is (x, y, heading_deg).");
  m.def(
      "local_to_global",
      [](std::pair<double, double> p, std::tuple<double, double, double> pose) {
        const auto [x, y, h] = pose;
        return as_pair(geometry::local_to_global({p.first, p.second}, {x, y, h}));
      },
      py::arg("point"), py::arg("pose"));

  py::class_<control::ControlCommand>(m, "ControlCommand")
      .def(py::init<>())
      .def(py::init([](double s, double t, int b) { return control::ControlCommand{s, t, b}; }), py::arg("steering"),
           py::arg("throttle"), py::arg("brake"))
      .def_readwrite("steering", &control::ControlCommand::steering)
      .def_readwrite("throttle", &control::ControlCommand::throttle)
      .def_readwrite("brake", &control::ControlCommand::brake)
      .def("in_range", &control::ControlCommand::in_range)
      .def("__eq__", [](const control::ControlCommand& a, const control::ControlCommand& b) { return a == b; })
      .def("__repr__", [](const control::ControlCommand& c) {
        return "ControlCommand(" + std::to_string(c.steering) + ", " + std::to_string(c.throttle) + ", " +
               std::to_string(c.brake) + ")";
      });

  py::class_<control::PidState>(m, "PidController")
      .def(py::init([](double kp, double ki, double kd) { return control::PidState({kp, ki, kd}); }), py::arg("kp"),
           py::arg("ki"), py::arg("kd"))
      .def("step", [](control::PidState& s, double e, double dt) { return control::pid_step(s, e, dt); },
           py::arg("error"), py::arg("dt"))
      .def("reset", &control::PidState::reset)
      .def_property_readonly("window_size", [](const control::PidState& s) { return s.window().size(); });

  m.def("denormalize", &control::denormalize, py::arg("s"));
  m.def("control_arbitration", &control::control_arbitration, py::arg("mlp"), py::arg("pid"), py::arg("beta"));
  m.def(
      "pid_control",
      [](const std::vector<std::pair<double, double>>& wp, double speed) {
        control::PidState lat(control::PidGains::lateral()), lon(control::PidGains::longitudinal());
        return control::pid_control(to_waypoints(wp), speed, lat, lon);
      },
      py::arg("waypoints"), py::arg("speed"), "One step of the waypoint follower from fresh controller state.");

  m.def(
      "infraction_penalty",
      [](const std::vector<std::string>& types) {
        std::vector<evaluation::InfractionEvent> ev;
        for (const auto& t : types) ev.push_back({evaluation::infraction_from_string(t), {}, 0.0});
        return evaluation::infraction_penalty(ev, evaluation::default_penalties());
      },
      py::arg("infractions"));
  m.def(
      "driving_score",
      [](const std::vector<std::pair<double, double>>& rc_ip) {
        std::vector<evaluation::RouteResult> rs;
        for (const auto& [rc, ip] : rc_ip) {
          evaluation::RouteResult r;
          r.route_completion = rc;
          r.infraction_penalty = ip;
          rs.push_back(r);
        }
        return evaluation::driving_score(rs);
      },
      py::arg("routes"), "Mean of RC * IP over (RC, IP) pairs.");

  m.def(
      "mgn_update",
      [](const std::vector<double>& w, const std::vector<double>& g, const std::vector<double>& r, double gamma) {
        training::MgnConfig cfg;
        cfg.gamma = gamma;
        return training::mgn_update(w, g, r, cfg);
      },
      py::arg("weights"), py::arg("grad_norms"), py::arg("ratios"), py::arg("gamma") = 1.5);

  m.def(
      "simulate_expert",
      [](const std::string& route_path, const std::string& mode, std::uint64_t seed) {
        const auto route = evaluation::load_route(route_path);
        const auto scene = evaluation::make_scene(route, seed);
        evaluation::ClosedLoopConfig cfg;
        cfg.mode = evaluation::scenario_mode_from_string(mode);
        cfg.seed = seed;
        evaluation::ExpertAgent agent;
        evaluation::ClosedLoopResult res;
        {
          py::gil_scoped_release release;
          res = evaluation::run_closed_loop(agent, scene, cfg);
        }
        py::dict d = route_result_dict(res.result);
        d["termination"] = res.termination;
        py::list speeds, times;
        for (const auto& rec : res.trace) {
          speeds.append(rec.speed);
          times.append(rec.time);
        }
        d["speed"] = speeds;
        d["time"] = times;
        return d;
      },
      py::arg("route"), py::arg("mode") = "normal", py::arg("seed") = 0,
      "Drive a route file with the privileged expert and return its scores and speed trace.");

  m.def(
      "synthetic_sample",
      [](std::uint64_t seed, const std::string& scenario) {
        const auto s = training::generate_synthetic_sample(seed, training::scenario_from_string(scenario));
        py::dict d;
        d["height"] = s.rgb.height;
        d["width"] = s.rgb.width;
        py::list wps;
        for (const auto& p : s.waypoints.points) wps.append(as_pair(p));
        d["waypoints"] = wps;
        d["steering"] = s.controls.steering;
        d["throttle"] = s.controls.throttle;
        d["brake"] = s.controls.brake;
        d["traffic_light"] = s.traffic_light;
        d["stop_sign"] = s.stop_sign;
        d["speed"] = s.speed;
        d["scenario"] = s.scenario;
        d["rgb"] = py::bytes(reinterpret_cast<const char*>(s.rgb.data.data()), s.rgb.data.size());
        return d;
      },
      py::arg("seed"), py::arg("scenario"), "Labels and raw RGB bytes of one procedurally generated frame.");
}

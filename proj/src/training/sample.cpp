#include "fusedrive/training/sample.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fusedrive/common/errors.hpp"

namespace fusedrive::training {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json point_json(geometry::Vec2 p) { return json::array({p.x, p.y}); }
geometry::Vec2 point_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

void write_sample(const Sample& sample, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path root(dir);
  write_png((root / "rgb.png").string(), sample.rgb);

  Image8 depth(sample.depth.height, sample.depth.width, 3);
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      for (int k = 0; k < 3; ++k) depth.at(r, c, k) = static_cast<std::uint8_t>(sample.depth.at(r, c)[k]);
    }
  }
  write_png((root / "depth.png").string(), depth);

  Image8 seg(sample.seg.rows(), sample.seg.cols(), 1);
  for (int r = 0; r < seg.height; ++r) {
    for (int c = 0; c < seg.width; ++c) seg.at(r, c, 0) = static_cast<std::uint8_t>(sample.seg.at(r, c));
  }
  write_png((root / "seg.png").string(), seg);

  json wps = json::array();
  for (const auto& p : sample.waypoints.points) wps.push_back(point_json(p));
  const json meta = {
      {"scenario", sample.scenario},
      {"seed", sample.seed},
      {"speed", sample.speed},
      {"command", control::to_string(sample.command)},
      {"route_point", point_json(sample.route_point)},
      {"pose", {sample.pose.x, sample.pose.y, sample.pose.heading_deg}},
      {"waypoints", wps},
      {"controls",
       {{"steering", sample.controls.steering},
        {"throttle", sample.controls.throttle},
        {"brake", sample.controls.brake}}},
      {"traffic_light", sample.traffic_light},
      {"stop_sign", sample.stop_sign},
  };
  std::ofstream out(root / "meta.json");
  if (!out) throw IoError("cannot write " + (root / "meta.json").string());
  out << meta.dump(2) << '\n';
}

Sample read_sample(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream in(root / "meta.json");
  if (!in) throw IoError("missing meta.json in " + dir);
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("malformed meta.json in " + dir + ": " + e.what());
  }

  Sample s;
  s.rgb = read_png((root / "rgb.png").string());
  if (s.rgb.channels != 3) throw IoError("rgb.png must have 3 channels in " + dir);

  const Image8 depth = read_png((root / "depth.png").string());
  if (depth.channels != 3) throw IoError("depth.png must have 3 channels in " + dir);
  s.depth = geometry::EncodedDepthImage(depth.height, depth.width);
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      for (int k = 0; k < 3; ++k) s.depth.at(r, c)[k] = depth.at(r, c, k);
    }
  }

  const Image8 seg = read_png((root / "seg.png").string());
  if (seg.channels != 1) throw IoError("seg.png must have 1 channel in " + dir);
  s.seg = geometry::ClassMap(seg.height, seg.width);
  for (int r = 0; r < seg.height; ++r) {
    for (int c = 0; c < seg.width; ++c) s.seg.at(r, c) = seg.at(r, c, 0);
  }
  if (depth.height != s.rgb.height || depth.width != s.rgb.width || seg.height != s.rgb.height ||
      seg.width != s.rgb.width) {
    throw IoError("image sizes disagree in " + dir);
  }

  try {
    s.scenario = meta.at("scenario").get<std::string>();
    s.seed = meta.at("seed").get<std::uint64_t>();
    s.speed = meta.at("speed").get<double>();
    s.command = control::command_from_string(meta.at("command").get<std::string>());
    s.route_point = point_from(meta.at("route_point"));
    const auto& pose = meta.at("pose");
    s.pose = {pose.at(0).get<double>(), pose.at(1).get<double>(), pose.at(2).get<double>()};
    const auto& wps = meta.at("waypoints");
    if (wps.size() != 3) throw IoError("expected 3 waypoints in " + dir);
    for (int i = 0; i < 3; ++i) s.waypoints.points[i] = point_from(wps.at(i));
    const auto& ctl = meta.at("controls");
    s.controls = {ctl.at("steering").get<double>(), ctl.at("throttle").get<double>(),
                  ctl.at("brake").get<double>()};
    s.traffic_light = meta.at("traffic_light").get<double>();
    s.stop_sign = meta.at("stop_sign").get<double>();
  } catch (const json::exception& e) {
    throw IoError("bad meta.json in " + dir + ": " + e.what());
  }
  return s;
}

std::vector<std::string> list_samples(const std::string& root) {
  if (!fs::is_directory(root)) throw IoError("dataset directory not found: " + root);
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) {
      dirs.push_back(entry.path().string());
    }
  }
  if (dirs.empty()) throw IoError("no samples under " + root);
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace fusedrive::training

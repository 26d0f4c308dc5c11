#include "plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "fusedrive/common/image.hpp"

namespace fusedrive::tools {

namespace {

constexpr int kSize = 480;
constexpr int kMargin = 20;

using Rgb = std::array<std::uint8_t, 3>;

struct Canvas {
  Image8 img{kSize, kSize, 3, 255};

  void dot(int r, int c, Rgb color) {
    if (r < 0 || c < 0 || r >= img.height || c >= img.width) return;
    for (int k = 0; k < 3; ++k) img.at(r, c, k) = color[k];
  }

  void line(double r0, double c0, double r1, double c1, Rgb color) {
    const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(r1 - r0), std::abs(c1 - c0)))));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      dot(static_cast<int>(std::lround(r0 + t * (r1 - r0))), static_cast<int>(std::lround(c0 + t * (c1 - c0))),
          color);
    }
  }
};

struct Bounds {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  void add(double x, double y) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
};

}  // namespace

void plot_trajectory(const evaluation::Route& route, const std::vector<geometry::Vec2>& path,
                     const std::string& png_path) {
  Bounds b;
  for (const auto& p : route.waypoints()) b.add(p.x, p.y);
  for (const auto& p : path) b.add(p.x, p.y);
  const double span = std::max({b.x1 - b.x0, b.y1 - b.y0, 1.0});
  const double scale = (kSize - 2 * kMargin) / span;
  // Global y grows to the right of +x travel, so it maps to image rows.
  auto col = [&](double x) { return kMargin + (x - b.x0) * scale; };
  auto row = [&](double y) { return kMargin + (y - b.y0) * scale; };

  Canvas canvas;
  const auto& wps = route.waypoints();
  for (std::size_t i = 1; i < wps.size(); ++i) {
    canvas.line(row(wps[i - 1].y), col(wps[i - 1].x), row(wps[i].y), col(wps[i].x), {160, 160, 160});
  }
  for (std::size_t i = 1; i < path.size(); ++i) {
    canvas.line(row(path[i - 1].y), col(path[i - 1].x), row(path[i].y), col(path[i].x), {30, 80, 220});
  }
  write_png(png_path, canvas.img);
}

void plot_curves(const std::map<std::string, std::vector<double>>& series, const std::string& png_path) {
  static const Rgb palette[] = {{220, 50, 50},  {30, 80, 220}, {40, 160, 60},  {200, 140, 20},
                                {140, 60, 180}, {20, 160, 170}, {120, 120, 120}, {230, 90, 170}};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t n = 0;
  for (const auto& [name, ys] : series) {
    n = std::max(n, ys.size());
    for (double y : ys) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
  }
  Canvas canvas;
  canvas.line(kSize - kMargin, kMargin, kSize - kMargin, kSize - kMargin, {0, 0, 0});
  canvas.line(kMargin, kMargin, kSize - kMargin, kMargin, {0, 0, 0});
  if (n >= 2 && hi > lo) {
    auto col = [&](std::size_t i) { return kMargin + static_cast<double>(i) * (kSize - 2 * kMargin) / (n - 1); };
    auto row = [&](double y) { return kSize - kMargin - (y - lo) / (hi - lo) * (kSize - 2 * kMargin); };
    std::size_t k = 0;
    for (const auto& [name, ys] : series) {
      const Rgb color = palette[k++ % 8];
      for (std::size_t i = 1; i < ys.size(); ++i) canvas.line(row(ys[i - 1]), col(i - 1), row(ys[i]), col(i), color);
    }
  }
  write_png(png_path, canvas.img);
}

}  // namespace fusedrive::tools

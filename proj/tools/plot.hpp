#pragma once

#include <map>
#include <string>
#include <vector>

#include "fusedrive/evaluation/route.hpp"

namespace fusedrive::tools {

// Top-down view of the route (gray) and the driven path (blue).
void plot_trajectory(const evaluation::Route& route, const std::vector<geometry::Vec2>& path,
                     const std::string& png_path);

// Line chart of named series over epochs, one color per series.
void plot_curves(const std::map<std::string, std::vector<double>>& series, const std::string& png_path);

}  // namespace fusedrive::tools

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace clusternet {

struct PlotStyle {
  int width = 640;
  int height = 640;
  double margin = 40.0;  // pixels kept clear around the data box
  double point_radius = 5.0;
};

// Standalone SVG scatter plot: one fill color per cluster id from a fixed
// palette (cycled past eight ids), with a dark outline on every point whose
// flag in `outlined` is set. Identical inputs render identical bytes.
// `outlined` may be empty (no outlines) or hold one flag per point.
std::string render_scatter_svg(const Eigen::Matrix2Xd& points,
                               const std::vector<int>& labels,
                               const std::vector<bool>& outlined = {},
                               const PlotStyle& style = PlotStyle());

}  // namespace clusternet

#include "clusternet/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace clusternet {

namespace {

const char* const kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};
constexpr int kPaletteSize = 8;

void append_fixed(std::string& s, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  s += buf;
}

// Maps one coordinate into [lo, hi]; a degenerate data range lands mid-span.
double to_pixel(double v, double vmin, double vmax, double lo, double hi) {
  if (vmax <= vmin) return 0.5 * (lo + hi);
  return lo + (v - vmin) / (vmax - vmin) * (hi - lo);
}

}  // namespace

std::string render_scatter_svg(const Eigen::Matrix2Xd& points,
                               const std::vector<int>& labels,
                               const std::vector<bool>& outlined,
                               const PlotStyle& style) {
  const Eigen::Index n = points.cols();
  if (n < 1) throw std::invalid_argument("plot: no points");
  if (labels.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("plot: one label per point required");
  if (!outlined.empty() && outlined.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("plot: outline flags must match the points");
  for (int label : labels)
    if (label < 0) throw std::invalid_argument("plot: negative cluster id");
  if (style.width < 1 || style.height < 1 ||
      2.0 * style.margin >= std::min(style.width, style.height) ||
      !(style.point_radius > 0.0))
    throw std::invalid_argument("plot: bad style");

  const double xmin = points.row(0).minCoeff();
  const double xmax = points.row(0).maxCoeff();
  const double ymin = points.row(1).minCoeff();
  const double ymax = points.row(1).maxCoeff();

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"";
  svg += std::to_string(style.width);
  svg += "\" height=\"";
  svg += std::to_string(style.height);
  svg += "\" viewBox=\"0 0 ";
  svg += std::to_string(style.width);
  svg += " ";
  svg += std::to_string(style.height);
  svg += "\">\n<rect width=\"";
  svg += std::to_string(style.width);
  svg += "\" height=\"";
  svg += std::to_string(style.height);
  svg += "\" fill=\"#ffffff\"/>\n";

  for (Eigen::Index i = 0; i < n; ++i) {
    const double cx = to_pixel(points(0, i), xmin, xmax, style.margin,
                               style.width - style.margin);
    // SVG y grows downward; flip so larger data y plots higher.
    const double cy = to_pixel(points(1, i), ymin, ymax,
                               style.height - style.margin, style.margin);
    svg += "<circle cx=\"";
    append_fixed(svg, cx);
    svg += "\" cy=\"";
    append_fixed(svg, cy);
    svg += "\" r=\"";
    append_fixed(svg, style.point_radius);
    svg += "\" fill=\"";
    svg += kPalette[labels[static_cast<std::size_t>(i)] % kPaletteSize];
    svg += "\"";
    if (!outlined.empty() && outlined[static_cast<std::size_t>(i)]) {
      svg += " stroke=\"#111111\" stroke-width=\"";
      append_fixed(svg, 0.5 * style.point_radius);
      svg += "\"";
    }
    svg += "/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace clusternet

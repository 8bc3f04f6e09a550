#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pushstab {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool line = false;  // polyline instead of dots
  std::string color = "#1f77b4";
  double radius = 2.0;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  bool equal_aspect = false;
  std::vector<SvgSeries> series;
};

/// Minimal static SVG (axes, ticks at the data range ends, legend).
/// Deterministic byte output for identical input.
void write_svg(const std::filesystem::path& path, const SvgPlot& plot);

}  // namespace pushstab

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rdc {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  ///< scatter points instead of a line
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Self-contained SVG document (no external fonts or scripts).
std::string render_svg(const Plot& plot);

/// Builds a plot from a sweep CSV, a two-column data CSV, a fit report or an
/// enhancement report (format detected from content). Throws
/// ValidationError / ParseError for anything else.
Plot plot_from_file(const std::filesystem::path& path);

}  // namespace rdc

#pragma once

#include <string>
#include <vector>

namespace ietmfc::app {

struct Series {
  std::string label;  // empty: not listed in the legend
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  double width = 1.5;
  bool dashed = false;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

/// Standalone SVG document with axes, ticks, polylines and a legend.
std::string render_svg(const Chart& chart, int width = 720, int height = 440);

/// Categorical colour cycle.
std::string palette(std::size_t index);

}  // namespace ietmfc::app

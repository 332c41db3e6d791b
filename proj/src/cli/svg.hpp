#pragma once

#include <string>
#include <vector>

namespace aeg::cli {

struct PlotSeries {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;  // non-finite values leave a gap in the drawn line
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::vector<std::string> x_tick_names;  // categorical x axis when non-empty
  int width = 720;
  int height = 440;
};

/// Standalone SVG document with one <polyline> per series.
std::string render_line_plot(const PlotSpec& spec);

}  // namespace aeg::cli

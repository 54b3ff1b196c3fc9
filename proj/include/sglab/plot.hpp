#pragma once

#include <string>
#include <vector>

namespace sglab {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool markers = false;  // points instead of a polyline
};

struct PlotOptions {
  std::string title;
  std::string xlabel, ylabel;
  bool logx = false, logy = false;
  int width = 640, height = 420;
};

/// Standalone SVG line chart. Non-finite points and, on log axes, non-positive
/// ones are skipped. Returns the document text.
std::string svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opt);
void write_svg_plot(const std::string& path, const std::vector<PlotSeries>& series, const PlotOptions& opt);

}  // namespace sglab

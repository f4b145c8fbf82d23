#pragma once

#include <array>
#include <ostream>
#include <string>
#include <vector>

namespace shadowbench {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = true;
};

inline constexpr int kPlotWidth = 960;
inline constexpr int kPlotHeight = 600;

/// Polyline chart; on a log axis points with y <= 0 or non-finite are dropped.
void write_line_plot(std::ostream& out, const PlotSpec& spec, const std::vector<Series>& series);

using Point2 = std::array<double, 2>;

/// Polygon outline (vertices in order) with the curve's breakpoints joined.
void write_curve_plot(std::ostream& out, const std::string& title, const std::vector<Point2>& outline,
                      const std::vector<Point2>& curve);

}  // namespace shadowbench

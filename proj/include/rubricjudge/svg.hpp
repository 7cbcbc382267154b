#pragma once

#include <string>
#include <vector>

namespace rubricjudge::svg {

// All charts render to standalone SVG text with a fixed palette and "%.2f"
// coordinates, so identical inputs give identical bytes.

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), plotted in order
};

// Multi-series line chart with markers; x ticks sit on the data points when
// there are twelve or fewer distinct x values.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series);

struct Bar {
  std::string label;
  double value = 0.0;
  double lo = 0.0;  // whisker ends; set both to `value` for no whisker
  double hi = 0.0;
};

// Bars against the left axis plus one overlaid line against the right axis,
// one entry per category. `bars` and `line_points` must have the same size.
std::string bar_line_chart(const std::string& title, const std::string& bar_axis_label,
                           const std::vector<Bar>& bars, const std::string& line_axis_label,
                           const std::vector<Bar>& line_points);

struct StackSegment {
  std::string label;
  double fraction = 0.0;
};

struct StackColumn {
  std::string label;
  std::vector<StackSegment> segments;  // bottom to top
};

// One stacked column per entry; segment colors are assigned by segment label
// in first-seen order so the same label keeps its color across columns.
std::string stacked_bar_chart(const std::string& title, const std::string& y_label,
                              const std::vector<StackColumn>& columns);

}  // namespace rubricjudge::svg

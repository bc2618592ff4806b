#pragma once

#include <string>
#include <vector>

namespace routeflow {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained SVG line chart. With log_y, points with y <= 0 are
/// dropped and the axis uses decade ticks.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<PlotSeries>& series,
                           bool log_y);

}  // namespace routeflow

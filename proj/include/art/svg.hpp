#pragma once

#include <string>
#include <vector>

// Minimal hand-written SVG line charts.

namespace art::harness {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Polyline per series over shared axes, with tick labels and a legend.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);

}  // namespace art::harness

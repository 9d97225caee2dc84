#pragma once

#include <string>
#include <vector>

namespace mtbo::harness {

/// One curve: y over x with an optional symmetric band (±band[i]).
struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> band;  // empty = no band
};

/// Self-contained SVG line chart with shaded ±band regions, axes, ticks and
/// a legend. The plot area and data ranges are embedded as data-* attributes
/// so the curves can be read back programmatically.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

}  // namespace mtbo::harness

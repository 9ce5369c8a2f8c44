#pragma once

#include "detour/offline_classifier.hpp"

#include <string>
#include <utility>
#include <vector>

namespace detour {

std::string roc_csv(const RocResult& result);

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Minimal standalone SVG line chart with axes, tick labels and a legend.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<ChartSeries>& series);

}  // namespace detour

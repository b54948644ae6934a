#pragma once

#include <string>
#include <vector>

#include "shaperank/crosscat/crosscat.hpp"

namespace shaperank::cli {

// One named curve for a line chart.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Self-contained SVG documents rendered straight from the data: rects,
// polylines, and text only — no scripts, fonts, or external assets. The
// provenance string is embedded as an XML comment so every artifact records
// the config and seed it came from.

std::string bar_chart_svg(const std::string& title,
                          const std::vector<std::string>& labels,
                          const std::vector<double>& values,
                          const std::string& provenance);

std::string line_chart_svg(const std::string& title,
                           const std::vector<Series>& series,
                           const std::string& x_label, const std::string& y_label,
                           const std::string& provenance);

// Square cell grid with a blue-white-red scale over [-1, 1] and the value
// printed in each cell; rows and columns share the same labels.
std::string heatmap_svg(const std::string& title,
                        const std::vector<std::string>& labels,
                        const std::vector<std::vector<double>>& matrix,
                        const std::string& provenance);

std::string dendrogram_svg(const std::string& title,
                           const crosscat::Dendrogram& dendrogram,
                           const std::string& provenance);

}  // namespace shaperank::cli

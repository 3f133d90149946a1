#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace picap {

// Minimal self-contained SVG plots for trace/scatter data. Data-first
// outputs (CSV/JSON) remain the primary artifacts.
struct SvgSeries {
  std::string label;
  std::vector<double> xs, ys;
  std::string color = "#1f77b4";
  bool line = true;  // false = scatter markers
};

void write_svg_plot(const std::filesystem::path& path,
                    const std::string& title, const std::string& x_label,
                    const std::string& y_label,
                    const std::vector<SvgSeries>& series);

}  // namespace picap

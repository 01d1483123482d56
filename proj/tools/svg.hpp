#pragma once

#include <string>
#include <vector>

#include "kqfactor/linalg.hpp"

namespace kqf::cli {

/// Diverging heatmap (blue negative, red positive) scaled to max |entry|.
std::string svg_heatmap(const Matrix& m, const std::string& title);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

std::string svg_line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel);

}  // namespace kqf::cli

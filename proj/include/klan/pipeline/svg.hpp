#pragma once

#include <string>
#include <utility>
#include <vector>

namespace klan::pipeline {

// Minimal static chart output. Everything is written with fixed formatting
// so a rerun produces the identical file.

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

void write_line_chart(const std::string& file, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

void write_bar_chart(const std::string& file, const std::string& title,
                     const std::string& y_label,
                     const std::vector<std::pair<std::string, double>>& bars);

}  // namespace klan::pipeline

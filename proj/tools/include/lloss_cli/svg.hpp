#pragma once

#include <string>
#include <vector>

namespace lloss::cli {

struct CurveSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;
};

struct ScatterSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Mean line with a +-1 std band per series. Each data point carries
/// data-mean / data-std attributes holding the exact %.17g values.
std::string render_curves(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<CurveSeries>& series);

/// One panel per series, sharing nothing but the style.
std::string render_scatter(const std::string& title, const std::string& x_label,
                           const std::vector<ScatterSeries>& panels);

std::string xml_escape(const std::string& s);

}  // namespace lloss::cli

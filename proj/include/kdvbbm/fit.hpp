#pragma once

#include <span>
#include <utility>
#include <vector>

namespace kdvbbm {

struct FitReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

/// Ordinary least squares y = slope x + intercept. Needs >= 3 points.
FitReport linear_fit(std::span<const double> x, std::span<const double> y);

/// Fit of log y against log x; points keep the original (x, y).
FitReport loglog_fit(std::span<const double> x, std::span<const double> y);

}  // namespace kdvbbm

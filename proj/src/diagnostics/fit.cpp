#include "kdvbbm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kdvbbm/error.hpp"

namespace kdvbbm {

FitReport linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
  if (x.size() < 3) throw InsufficientDataError("linear_fit: need at least 3 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InsufficientDataError("linear_fit: abscissae are all equal");
  FitReport fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  // A constant series is fitted exactly.
  fit.r_squared = syy == 0.0 ? 1.0 : std::min(1.0, sxy * sxy / (sxx * syy));
  for (std::size_t i = 0; i < x.size(); ++i) fit.points.emplace_back(x[i], y[i]);
  return fit;
}

FitReport loglog_fit(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw std::invalid_argument("loglog_fit: values must be positive");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  FitReport fit = linear_fit(lx, ly);
  for (std::size_t i = 0; i < x.size(); ++i) fit.points[i] = {x[i], y[i]};
  return fit;
}

}  // namespace kdvbbm

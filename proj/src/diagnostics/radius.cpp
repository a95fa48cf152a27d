#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kdvbbm/diagnostics.hpp"
#include "kdvbbm/error.hpp"

namespace kdvbbm {

namespace {

constexpr int kMinModes = 12;

struct LeastSquares {
  Eigen::VectorXd coef;
  Eigen::VectorXd stderr_;
  double r_squared = 1.0;
};

LeastSquares solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  LeastSquares out;
  const auto qr = a.colPivHouseholderQr();
  out.coef = qr.solve(y);
  const Eigen::VectorXd resid = y - a * out.coef;
  const double sse = resid.squaredNorm();
  const double sst = (y.array() - y.mean()).matrix().squaredNorm();
  out.r_squared = sst == 0.0 ? 1.0 : std::clamp(1.0 - sse / sst, 0.0, 1.0);
  const auto dof = static_cast<double>(a.rows() - a.cols());
  const double s2 = dof > 0 ? sse / dof : 0.0;
  const Eigen::MatrixXd cov = (a.transpose() * a).inverse() * s2;
  out.stderr_ = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

}  // namespace

RadiusEstimate estimate_radius(const SpectralField& field, double floor, double ceiling) {
  if (!(floor > 0.0) || !(ceiling > floor)) {
    throw std::invalid_argument("estimate_radius: need 0 < floor < ceiling");
  }
  const SpectralGrid& grid = field.grid();
  const double peak = max_abs_coefficient(field);
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw InsufficientDataError("estimate_radius: field has no finite nonzero coefficients");
  }

  // |c(xi)| and |c(-xi)| agree for real fields; average them anyway. The
  // Nyquist mode has no partner and is skipped.
  std::vector<double> xs, ys;
  for (int k = 1; k < grid.size() / 2; ++k) {
    const double mag = 0.5 * (std::abs(field[grid.index_of_mode(k)]) +
                              std::abs(field[grid.index_of_mode(-k)]));
    const double rel = mag / peak;
    if (rel > floor && rel < ceiling) {
      xs.push_back(std::abs(grid.wavenumber(grid.index_of_mode(k))));
      ys.push_back(std::log(mag));
    }
  }
  const int m = static_cast<int>(xs.size());
  if (m < kMinModes) {
    throw InsufficientDataError("estimate_radius: only " + std::to_string(m) +
                                " modes inside (floor, ceiling); need 12");
  }

  Eigen::VectorXd y(m);
  Eigen::MatrixXd a(m, 3), ext(m, 4);
  for (int i = 0; i < m; ++i) {
    const double xi = xs[static_cast<std::size_t>(i)];
    y(i) = ys[static_cast<std::size_t>(i)];
    a(i, 0) = 1.0;
    a(i, 1) = xi;
    a(i, 2) = 0.5 * std::log1p(xi * xi);
    ext.row(i) << a.row(i), xi * xi;
  }
  const LeastSquares base = solve(a, y);

  RadiusEstimate est;
  est.modes_used = m;
  est.sigma_est = -base.coef(1);
  est.power_exponent = base.coef(2);
  est.fit.slope = base.coef(1);
  est.fit.intercept = base.coef(0);
  est.fit.r_squared = base.r_squared;
  for (int i = 0; i < m; ++i) est.fit.points.emplace_back(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)]);

  // A quadratic term that is both resolved above the noise and large against
  // the linear decay across the band means the tail is not exponential.
  const LeastSquares quad = solve(ext, y);
  est.curvature = quad.coef(3);
  const double width = xs.back() - xs.front();
  const bool resolved = std::abs(est.curvature) > 3.0 * quad.stderr_(3);
  const bool large = std::abs(est.curvature) * width > 0.1 * std::abs(est.sigma_est);
  est.exponential_tail = !(resolved && large) && base.r_squared >= 0.99;
  return est;
}

DecayReport decay_fit(std::span<const double> times, std::span<const double> sigma_estimates) {
  if (times.size() != sigma_estimates.size()) {
    throw std::invalid_argument("decay_fit: size mismatch");
  }
  if (times.size() < 5) throw InsufficientDataError("decay_fit: need >= 5 points");
  double t_min = std::numeric_limits<double>::infinity(), t_max = 0.0;
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("decay_fit: times must be positive");
    t_min = std::min(t_min, t);
    t_max = std::max(t_max, t);
  }
  if (t_max < 10.0 * t_min) throw InsufficientDataError("decay_fit: times span less than a decade");

  DecayReport rep;
  rep.min_sigma_sqrt_t = std::numeric_limits<double>::infinity();
  std::vector<double> ft, fs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double s = sigma_estimates[i];
    rep.min_sigma_sqrt_t = std::min(rep.min_sigma_sqrt_t, std::isfinite(s) ? s * std::sqrt(times[i]) : -1.0);
    if (s > 0.0 && std::isfinite(s)) {
      ft.push_back(times[i]);
      fs.push_back(s);
    }
  }
  rep.lower_bound_holds = rep.min_sigma_sqrt_t > 0.0;
  rep.fit = loglog_fit(ft, fs);
  rep.alpha = -rep.fit.slope;
  return rep;
}

}  // namespace kdvbbm

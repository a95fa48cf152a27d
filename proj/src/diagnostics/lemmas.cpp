#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kdvbbm/diagnostics.hpp"
#include "kdvbbm/spectral.hpp"

namespace kdvbbm {

namespace {

// Beyond this the direct cosh/sech evaluation may overflow.
constexpr double kDirectLimit = 300.0;

struct Tracker {
  RatioReport& report;

  // rhs == 0 requires lhs == 0.
  void add(double lhs, double rhs, const auto& describe) {
    if (rhs == 0.0) {
      ++report.sample_count;
      if (lhs != 0.0) {
        ++report.violations;
        if (report.argmax_input.empty()) report.argmax_input = describe();
      }
      return;
    }
    take(lhs / rhs, describe);
  }

  void take(double ratio, const auto& describe) {
    ++report.sample_count;
    if (!(ratio <= 1.0)) ++report.violations;
    if (ratio > report.max_ratio || std::isnan(ratio)) {
      report.max_ratio = ratio;
      report.argmax_input = describe();
    }
  }
};

std::string tuple_string(std::span<const double> xs) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? ", " : "") << xs[i];
  os << ")";
  return os.str();
}

// cosh|sum xs| * prod sech|x_j|
double cosh_sech_product(std::span<const double> xs) {
  double total = 0.0;
  double largest = 0.0;
  for (double x : xs) {
    total += x;
    largest = std::max(largest, std::abs(x));
  }
  if (largest <= kDirectLimit && std::abs(total) <= kDirectLimit) {
    double value = std::cosh(total);
    for (double x : xs) value /= std::cosh(x);
    return value;
  }
  double log_value = log_cosh(total);
  for (double x : xs) log_value -= log_cosh(x);
  return std::exp(log_value);
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("linspace: count must be >= 2");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return out;
}

std::vector<double> geomspace(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw std::invalid_argument("geomspace: bounds must be > 0");
  auto logs = linspace(std::log(lo), std::log(hi), count);
  for (auto& v : logs) v = std::exp(v);
  logs.front() = lo;
  logs.back() = hi;
  return logs;
}

RatioReport verify_cosh_product_bound(int p, std::span<const double> xi_grid) {
  if (p != 2 && p != 3) throw std::invalid_argument("verify_cosh_product_bound: p must be 2 or 3");
  if (xi_grid.empty()) throw std::invalid_argument("verify_cosh_product_bound: empty grid");
  RatioReport report;
  report.name = p == 2 ? "cosh_product_p2" : "cosh_product_p3";
  report.parameters["p"] = p;
  report.parameters["grid_points"] = static_cast<double>(xi_grid.size());
  report.parameters["grid_min"] = xi_grid.front();
  report.parameters["grid_max"] = xi_grid.back();
  Tracker tracker{report};

  const std::size_t n = xi_grid.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
  std::vector<double> xs(static_cast<std::size_t>(p));
  while (true) {
    for (int j = 0; j < p; ++j) xs[static_cast<std::size_t>(j)] = xi_grid[idx[static_cast<std::size_t>(j)]];
    const double lhs = std::abs(1.0 - cosh_sech_product(xs));
    double pairs = 0.0;
    for (int j = 0; j < p; ++j) {
      for (int k = 0; k < p; ++k) {
        if (j != k) pairs += std::abs(xs[static_cast<std::size_t>(j)]) * std::abs(xs[static_cast<std::size_t>(k)]);
      }
    }
    const double rhs = std::ldexp(pairs, p);
    tracker.add(lhs, rhs, [&] { return "xi=" + tuple_string(xs); });

    int pos = p - 1;
    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == n) idx[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  return report;
}

std::vector<std::pair<double, double>> random_pairs(std::uint64_t seed, long count, double lo,
                                                    double hi) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const double a = dist(engine);
    out.emplace_back(a, dist(engine));
  }
  return out;
}

RatioReport verify_cosh_difference_bound(std::span<const std::pair<double, double>> ab) {
  RatioReport report;
  report.name = "cosh_difference";
  report.parameters["pairs"] = static_cast<double>(ab.size());
  Tracker tracker{report};
  for (const auto& [a, b] : ab) {
    if (std::abs(a) > kDirectLimit || std::abs(b) > kDirectLimit) {
      throw std::invalid_argument("verify_cosh_difference_bound: |a|, |b| must be <= 300");
    }
    const double ca = std::cosh(a);
    const double cb = std::cosh(b);
    const double lhs = std::abs(cb - ca);
    const double rhs = 0.5 * std::abs(b * b - a * a) * (cb + ca);
    tracker.add(lhs, rhs, [&] {
      const double pair[] = {a, b};
      return "(a, b)=" + tuple_string(pair);
    });
  }
  return report;
}

std::vector<RatioReport> verify_weight_bounds(std::span<const double> sigma_grid,
                                              std::span<const double> xi_grid) {
  std::vector<RatioReport> reports(4);
  reports[0].name = "half_exp_below_cosh";
  reports[1].name = "cosh_below_exp";
  reports[2].name = "exp_weight_sigma";
  reports[3].name = "cosh_weight_sigma_squared";
  for (auto& r : reports) {
    r.parameters["sigma_points"] = static_cast<double>(sigma_grid.size());
    r.parameters["xi_points"] = static_cast<double>(xi_grid.size());
  }
  Tracker lower{reports[0]}, upper{reports[1]}, expw{reports[2]}, hypw{reports[3]};

  for (double s : sigma_grid) {
    if (s < 0.0) throw std::invalid_argument("verify_weight_bounds: sigma must be >= 0");
    for (double xi : xi_grid) {
      const double x = s * std::abs(xi);
      const auto describe = [&] {
        const double point[] = {s, xi};
        return "(sigma, xi)=" + tuple_string(point);
      };
      // Ratios written without the overflowing factor exp(x):
      // (exp(x)/2) / cosh(x) = 1 / (1 + exp(-2x)), cosh(x) / exp(x) = (1 + exp(-2x)) / 2.
      const double e2 = std::exp(-2.0 * x);
      lower.take(1.0 / (1.0 + e2), describe);
      upper.take(0.5 * (1.0 + e2), describe);
      if (xi == 0.0 || s == 0.0) {
        // Both sides vanish in the limit xi -> 0 (and identically at sigma = 0).
        expw.add(0.0, 0.0, describe);
        hypw.add(0.0, 0.0, describe);
        continue;
      }
      expw.take(-std::expm1(-x) / x, describe);
      // 1 - sech x = 2 sinh^2(x/2) / cosh x
      const double one_minus_sech =
          x < 40.0 ? 2.0 * std::pow(std::sinh(0.5 * x), 2) / std::cosh(x) : -std::expm1(-log_cosh(x));
      hypw.take(one_minus_sech / (x * x), describe);
    }
  }
  return reports;
}

}  // namespace kdvbbm

#include "kdvbbm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "kdvbbm/error.hpp"

namespace kdvbbm {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

double parity(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

// Half spectrum (m = 0..M/2) of the field sampled on an M-point grid of the
// same box. Samples are x_j = -L/2 + j L / M, which puts a (-1)^k phase on
// mode k relative to FFTW's origin at x = 0.
std::vector<Complex> half_spectrum(std::span<const Complex> c, int n, int padded) {
  std::vector<Complex> h(static_cast<std::size_t>(padded / 2 + 1));
  for (int m = 0; m < n / 2; ++m) {
    h[static_cast<std::size_t>(m)] = parity(m) * c[static_cast<std::size_t>(n / 2 + m)];
  }
  const double nyquist = parity(n / 2) * c[0].real();
  // On a finer grid the unpaired -N/2 mode is a cosine split over +-N/2.
  h[static_cast<std::size_t>(n / 2)] = (padded == n) ? nyquist : 0.5 * nyquist;
  return h;
}

std::vector<double> samples_on(std::span<const Complex> c, int n, int padded) {
  const auto& fft = detail::RealFft::get(padded);
  std::vector<double> out(static_cast<std::size_t>(padded));
  fft.backward(half_spectrum(c, n, padded), out);
  return out;
}

std::vector<Complex> coefficients_from(std::span<const double> samples, int n) {
  const int padded = static_cast<int>(samples.size());
  const auto& fft = detail::RealFft::get(padded);
  std::vector<Complex> x(static_cast<std::size_t>(padded / 2 + 1));
  fft.forward(samples, x);
  std::vector<Complex> c(static_cast<std::size_t>(n));
  const double scale = 1.0 / padded;
  for (int k = 0; k < n / 2; ++k) {
    const Complex v = parity(k) * scale * x[static_cast<std::size_t>(k)];
    c[static_cast<std::size_t>(n / 2 + k)] = v;
    if (k > 0) c[static_cast<std::size_t>(n / 2 - k)] = std::conj(v);
  }
  if (padded == n) c[0] = parity(n / 2) * scale * x[static_cast<std::size_t>(n / 2)].real();
  return c;
}

void check_guard(double sigma, const SpectralGrid& grid, const char* what) {
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument(std::string(what) + ": sigma must be finite and >= 0");
  }
  if (sigma * grid.max_wavenumber() > kWeightGuard) {
    throw OverflowGuardError(std::string(what) + ": sigma * max|xi| = " +
                             std::to_string(sigma * grid.max_wavenumber()) + " exceeds " +
                             std::to_string(kWeightGuard));
  }
}

}  // namespace

std::vector<Complex> forward_transform(std::span<const double> samples, const SpectralGrid& grid) {
  if (static_cast<int>(samples.size()) != grid.size()) {
    throw std::invalid_argument("forward_transform: got " + std::to_string(samples.size()) +
                                " samples for a grid of " + std::to_string(grid.size()));
  }
  return coefficients_from(samples, grid.size());
}

std::vector<double> inverse_transform(std::span<const Complex> coefficients,
                                      const SpectralGrid& grid) {
  if (static_cast<int>(coefficients.size()) != grid.size()) {
    throw std::invalid_argument("inverse_transform: coefficient count does not match grid");
  }
  const SpectralField view(grid, {coefficients.begin(), coefficients.end()});
  const double residue = view.symmetry_residue();
  if (residue > kSymmetryTolerance) {
    throw SymmetryError("inverse_transform: Hermitian symmetry violated (residue " +
                        std::to_string(residue) + ")");
  }
  return samples_on(coefficients, grid.size(), grid.size());
}

Multiplier make_multiplier(const SpectralGrid& grid, const Symbol& m) {
  Multiplier out(static_cast<std::size_t>(grid.size()));
  for (int i = 1; i < grid.size(); ++i) out[static_cast<std::size_t>(i)] = m(grid.wavenumber(i));
  const double xn = grid.max_wavenumber();
  out[0] = 0.5 * (m(xn) + m(-xn));
  return out;
}

SpectralField apply_multiplier(const SpectralField& field, const Symbol& m) {
  const Multiplier table = make_multiplier(field.grid(), m);
  return apply_multiplier(field, std::span<const Complex>(table));
}

SpectralField apply_multiplier(const SpectralField& field, std::span<const Complex> m) {
  SpectralField out(field.grid());
  for (int i = 0; i < field.size(); ++i) out[i] = m[static_cast<std::size_t>(i)] * field[i];
  return out;
}

SpectralField apply_multiplier(const SpectralField& field, std::span<const double> m) {
  SpectralField out(field.grid());
  for (int i = 0; i < field.size(); ++i) out[i] = m[static_cast<std::size_t>(i)] * field[i];
  return out;
}

SpectralField derivative(const SpectralField& field, int order) {
  return apply_multiplier(field, [order](double xi) { return std::pow(Complex(0.0, xi), order); });
}

std::vector<double> padded_samples(const SpectralField& field, int padded_size) {
  if (padded_size < field.size() || padded_size % 2 != 0) {
    throw std::invalid_argument("padded_samples: padded size must be even and >= N");
  }
  return samples_on(field.coefficients(), field.size(), padded_size);
}

SpectralField truncate_samples(std::span<const double> samples, const SpectralGrid& grid) {
  return SpectralField(grid, coefficients_from(samples, grid.size()));
}

SpectralField dealias_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g, "dealias_product");
  const int padded = 2 * f.size();
  auto a = padded_samples(f, padded);
  const auto b = padded_samples(g, padded);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] *= b[j];
  SpectralField out = truncate_samples(a, f.grid());
  out[0] = 0.0;
  return out;
}

SpectralField dealias_product(const SpectralField& f, const SpectralField& g,
                              const SpectralField& h) {
  require_same_grid(f, g, "dealias_product");
  require_same_grid(f, h, "dealias_product");
  const int padded = 4 * f.size();
  auto a = padded_samples(f, padded);
  const auto b = padded_samples(g, padded);
  const auto c = padded_samples(h, padded);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] *= b[j] * c[j];
  SpectralField out = truncate_samples(a, f.grid());
  out[0] = 0.0;
  return out;
}

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
}

std::vector<double> gevrey_weight(WeightKind kind, double sigma, const SpectralGrid& grid) {
  if (kind == WeightKind::cosh || kind == WeightKind::exp) {
    check_guard(sigma, grid, "gevrey_weight");
  } else if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument("gevrey_weight: sigma must be finite and >= 0");
  }
  std::vector<double> w(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    const double a = sigma * std::abs(grid.wavenumber(i));
    double value = 1.0;
    switch (kind) {
      case WeightKind::cosh: value = std::cosh(a); break;
      case WeightKind::sech: value = 1.0 / std::cosh(a); break;
      case WeightKind::exp: value = std::exp(a); break;
      case WeightKind::inv_exp: value = std::exp(-a); break;
      case WeightKind::none: break;
    }
    w[static_cast<std::size_t>(i)] = value;
  }
  return w;
}

double weighted_norm(const SpectralField& field, GevreyParams params, WeightKind weight) {
  if (params.sigma < 0.0 || !std::isfinite(params.sigma)) {
    throw std::invalid_argument("weighted_norm: sigma must be finite and >= 0");
  }
  const auto& grid = field.grid();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(field.size()));
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < field.size(); ++i) {
    const double mag = std::abs(field[i]);
    if (mag == 0.0) continue;
    const double xi = grid.wavenumber(i);
    const double a = params.sigma * std::abs(xi);
    double log_w = 0.0;
    switch (weight) {
      case WeightKind::cosh: log_w = log_cosh(a); break;
      case WeightKind::sech: log_w = -log_cosh(a); break;
      case WeightKind::exp: log_w = a; break;
      case WeightKind::inv_exp: log_w = -a; break;
      case WeightKind::none: break;
    }
    const double t = 2.0 * log_w + params.s * std::log1p(xi * xi) + 2.0 * std::log(mag);
    terms.push_back(t);
    top = std::max(top, t);
  }
  if (terms.empty()) return 0.0;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return std::exp(0.5 * (std::log(grid.length()) + top + std::log(sum)));
}

double inner_product(const SpectralField& f, const SpectralField& g) {
  require_same_grid(f, g, "inner_product");
  double sum = 0.0;
  for (int i = 0; i < f.size(); ++i) sum += (std::conj(f[i]) * g[i]).real();
  return f.grid().length() * sum;
}

}  // namespace kdvbbm

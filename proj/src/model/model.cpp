#include "kdvbbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kdvbbm/error.hpp"

namespace kdvbbm {

void ModelParams::validate() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(gamma) || !finite(gamma1) || !finite(gamma2) || !finite(delta1) || !finite(delta2)) {
    throw std::invalid_argument("params: coefficients must be finite");
  }
  if (!(gamma1 > 0.0)) throw std::invalid_argument("params.gamma1 must be > 0");
  if (!(delta1 > 0.0)) throw std::invalid_argument("params.delta1 must be > 0");
}

double varphi(double xi, const ModelParams& p) {
  const double x2 = xi * xi;
  return 1.0 + p.gamma1 * x2 + p.delta1 * x2 * x2;
}

double dispersion_phi(double xi, const ModelParams& p) {
  const double x2 = xi * xi;
  return xi * (1.0 - p.gamma2 * x2 + p.delta2 * x2 * x2) / varphi(xi, p);
}

double symbol_tau(double xi, const ModelParams& p) {
  return xi * (3.0 - 4.0 * p.gamma * xi * xi) / (4.0 * varphi(xi, p));
}

double symbol_psi(double xi, const ModelParams& p) { return xi / varphi(xi, p); }

namespace {

// Literal coefficient of (eta_x^2)_x in the equation, independent of gamma.
constexpr double kSlopeSquareCoefficient = 7.0 / 48.0;

// L * sum_k extra_k cosh(sigma |xi_k|)^2 |c_k|^2, summed in log space.
double weighted_square_sum(const SpectralField& f, double sigma, std::span<const double> extra) {
  const auto& grid = f.grid();
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(f.size()));
  double top = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < f.size(); ++i) {
    const double mag = std::abs(f[i]);
    if (mag == 0.0) continue;
    const double t = 2.0 * log_cosh(sigma * std::abs(grid.wavenumber(i))) +
                     std::log(extra[static_cast<std::size_t>(i)]) + 2.0 * std::log(mag);
    terms.push_back(t);
    top = std::max(top, t);
  }
  if (terms.empty()) return 0.0;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return grid.length() * std::exp(top + std::log(sum));
}

double quadrature(const SpectralField& a, const SpectralField& b) {
  const auto sa = a.samples();
  const auto sb = b.samples();
  double sum = 0.0;
  for (std::size_t j = 0; j < sa.size(); ++j) sum += sa[j] * sb[j];
  return a.grid().spacing() * sum;
}

SpectralField quadratic_remainder(const SpectralField& w, double sigma) {
  const auto cosh_w = gevrey_weight(WeightKind::cosh, sigma, w.grid());
  const auto sech_w = gevrey_weight(WeightKind::sech, sigma, w.grid());
  const SpectralField u = apply_multiplier(w, std::span<const double>(sech_w));
  SpectralField out = dealias_product(w, w);
  out -= apply_multiplier(dealias_product(u, u), std::span<const double>(cosh_w));
  return out;
}

}  // namespace

Model::Model(SpectralGrid grid, ModelParams params)
    : grid_(std::move(grid)), params_(params) {
  params_.validate();
  const auto n = static_cast<std::size_t>(grid_.size());
  varphi_.resize(n);
  phi_.resize(n);
  const auto phi_m = make_multiplier(grid_, [&](double xi) { return Complex(dispersion_phi(xi, params_)); });
  for (std::size_t i = 0; i < n; ++i) {
    varphi_[i] = varphi(grid_.wavenumber(static_cast<int>(i)), params_);
    phi_[i] = phi_m[i].real();
  }
  tau_ = make_multiplier(grid_, [&](double xi) { return Complex(symbol_tau(xi, params_)); });
  psi_ = make_multiplier(grid_, [&](double xi) { return Complex(symbol_psi(xi, params_)); });
  ddx_ = make_multiplier(grid_, [](double xi) { return Complex(0.0, xi); });
}

void Model::check(const SpectralField& f, const char* where) const {
  if (!(f.grid() == grid_)) {
    throw GridMismatchError(std::string(where) + ": field grid differs from model grid");
  }
}

SpectralField Model::nonlinearity(const SpectralField& eta) const {
  check(eta, "nonlinearity");
  const int padded = 4 * grid_.size();
  const auto e = padded_samples(eta, padded);
  const auto ex = padded_samples(apply_multiplier(eta, std::span<const Complex>(ddx_)), padded);
  std::vector<double> sq(e.size()), sqx(e.size()), cube(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) {
    sq[j] = e[j] * e[j];
    sqx[j] = ex[j] * ex[j];
    cube[j] = sq[j] * e[j];
  }
  const SpectralField a = truncate_samples(sq, grid_);
  const SpectralField b = truncate_samples(sqx, grid_);
  const SpectralField c = truncate_samples(cube, grid_);
  SpectralField out(grid_);
  // Nyquist entries of products are dropped (tau, psi vanish there anyway).
  for (int i = 1; i < grid_.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    out[i] = tau_[k] * a[i] - psi_[k] * (kSlopeSquareCoefficient * b[i] + 0.125 * c[i]);
  }
  return out;
}

SpectralField Model::rhs(const SpectralField& eta) const {
  SpectralField out = nonlinearity(eta);
  for (int i = 0; i < grid_.size(); ++i) {
    out[i] = Complex(0.0, -1.0) * (phi_[static_cast<std::size_t>(i)] * eta[i] + out[i]);
  }
  return out;
}

SpectralField Model::remainder_n(const SpectralField& v, double sigma) const {
  check(v, "remainder_N");
  const SpectralField n1 = remainder_N1(v, sigma);
  const SpectralField n2 = remainder_N2(v, sigma);
  const SpectralField n3 = remainder_N3(v, sigma);
  const double g = params_.gamma;
  SpectralField out(grid_);
  for (int i = 0; i < grid_.size(); ++i) {
    const double xi = grid_.wavenumber(i);
    const Complex d = ddx_[static_cast<std::size_t>(i)];
    out[i] = d * (0.75 - g * xi * xi) * n1[i] - g * d * n2[i] - 0.125 * d * n3[i];
  }
  return out;
}

PairingTerms Model::pairing(const SpectralField& v, double sigma) const {
  check(v, "pairing_vN");
  const double g = params_.gamma;
  const SpectralField vx = apply_multiplier(v, std::span<const Complex>(ddx_));
  const SpectralField lifted = apply_multiplier(
      v, [g](double xi) { return Complex(0.75 - g * xi * xi); });
  const SpectralField dn1 =
      apply_multiplier(remainder_N1(v, sigma), std::span<const Complex>(ddx_));
  PairingTerms t;
  t.i1 = quadrature(lifted, dn1);
  t.i2 = g * quadrature(vx, remainder_N2(v, sigma));
  t.i3 = 0.125 * quadrature(vx, remainder_N3(v, sigma));
  t.total = t.i1 + t.i2 + t.i3;
  return t;
}

double Model::pairing_direct(const SpectralField& v, double sigma) const {
  return inner_product(v, remainder_n(v, sigma));
}

double Model::energy(const SpectralField& eta) const {
  check(eta, "energy_E");
  return 0.5 * weighted_square_sum(eta, 0.0, varphi_);
}

EnergyReport Model::energy_report(const SpectralField& eta, double sigma, double time) const {
  check(eta, "energy_E_sigma");
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument("energy_E_sigma: sigma must be finite and >= 0");
  }
  if (sigma * grid_.max_wavenumber() > kWeightGuard) {
    throw OverflowGuardError("energy_E_sigma: sigma exceeds the weight guard for this grid");
  }
  EnergyReport r;
  r.time = time;
  r.sigma = sigma;
  r.energy = energy(eta);
  r.modified_energy = 0.5 * weighted_square_sum(eta, sigma, varphi_);
  r.h2_norm_vsigma = hs_norm(eta, sigma, 2.0);
  const double h2 = r.h2_norm_vsigma * r.h2_norm_vsigma;
  const double lo = 0.75 * std::min({1.0, params_.gamma1, params_.delta1});
  const double hi = std::max({1.0, params_.gamma1, params_.delta1});
  const double slack = 1e-12 * h2;
  r.equivalence_holds =
      lo * h2 <= 2.0 * r.modified_energy + slack && 2.0 * r.modified_energy <= hi * h2 + slack;
  return r;
}

SpectralField nonlinearity_F(const SpectralField& eta, const ModelParams& p) {
  return Model(eta.grid(), p).nonlinearity(eta);
}

SpectralField weighted_field(const SpectralField& eta, double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::invalid_argument("weighted_field: sigma must be finite and >= 0");
  }
  SpectralField out(eta.grid());
  for (int i = 0; i < eta.size(); ++i) {
    const Complex c = eta[i];
    if (c == Complex(0.0)) continue;
    const double a = sigma * std::abs(eta.grid().wavenumber(i));
    if (a <= kWeightGuard) {
      out[i] = std::cosh(a) * c;
    } else {
      out[i] = std::exp(log_cosh(a) + std::log(std::abs(c))) * (c / std::abs(c));
    }
  }
  if (!out.is_finite()) {
    throw OverflowGuardError("weighted_field: cosh(sigma|D|) eta is not finite; sigma too large");
  }
  return out;
}

SpectralField remainder_N1(const SpectralField& v, double sigma) {
  return quadratic_remainder(v, sigma);
}

SpectralField remainder_N2(const SpectralField& v, double sigma) {
  return quadratic_remainder(derivative(v), sigma);
}

SpectralField remainder_N3(const SpectralField& v, double sigma) {
  const auto cosh_w = gevrey_weight(WeightKind::cosh, sigma, v.grid());
  const auto sech_w = gevrey_weight(WeightKind::sech, sigma, v.grid());
  const SpectralField u = apply_multiplier(v, std::span<const double>(sech_w));
  SpectralField out = dealias_product(v, v, v);
  out -= apply_multiplier(dealias_product(u, u, u), std::span<const double>(cosh_w));
  return out;
}

SpectralField remainder_N(const SpectralField& v, double sigma, const ModelParams& p) {
  return Model(v.grid(), p).remainder_n(v, sigma);
}

double energy_E(const SpectralField& eta, const ModelParams& p) {
  return Model(eta.grid(), p).energy(eta);
}

EnergyReport energy_E_sigma(const SpectralField& eta, double sigma, const ModelParams& p) {
  return Model(eta.grid(), p).energy_report(eta, sigma);
}

PairingTerms pairing_vN(const SpectralField& v, double sigma, const ModelParams& p) {
  return Model(v.grid(), p).pairing(v, sigma);
}

}  // namespace kdvbbm

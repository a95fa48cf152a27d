#pragma once

#include <vector>

#include "kdvbbm/field.hpp"
#include "kdvbbm/spectral.hpp"

namespace kdvbbm {

inline constexpr double kConservativeGamma = 7.0 / 48.0;

/// Coefficients of
///   eta_t + eta_x - g1 eta_txx + g2 eta_xxx + d1 eta_txxxx + d2 eta_xxxxx
///     = -3/4 (eta^2)_x - g (eta^2)_xxx + 7/48 (eta_x^2)_x + 1/8 (eta^3)_x.
struct ModelParams {
  double gamma = kConservativeGamma;
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  double delta1 = 1.0;
  double delta2 = 0.0;

  /// Throws std::invalid_argument unless gamma1 > 0 and delta1 > 0.
  void validate() const;
  /// Energy E is an invariant only in this case.
  bool conservative_case() const { return gamma == kConservativeGamma; }

  bool operator==(const ModelParams&) const = default;
};

// 1 + g1 xi^2 + d1 xi^4, the divisor of the time derivative.
double varphi(double xi, const ModelParams& p);
// xi (1 - g2 xi^2 + d2 xi^4) / varphi
double dispersion_phi(double xi, const ModelParams& p);
// xi (3 - 4 g xi^2) / (4 varphi)
double symbol_tau(double xi, const ModelParams& p);
// xi / varphi
double symbol_psi(double xi, const ModelParams& p);

struct EnergyReport {
  double time = 0.0;
  double energy = 0.0;
  double modified_energy = 0.0;
  double sigma = 0.0;
  double h2_norm_vsigma = 0.0;
  // c_lo ||v||^2 <= 2 E_sigma <= c_hi ||v||^2 with
  // c_lo = 3/4 min(1, g1, d1) and c_hi = max(1, g1, d1).
  bool equivalence_holds = true;
};

struct PairingTerms {
  double total = 0.0;
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
};

/// The model's operators tabulated on one grid. Immutable after
/// construction; safe to share between threads.
class Model {
 public:
  Model(SpectralGrid grid, ModelParams params);

  const SpectralGrid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }

  std::span<const double> varphi_table() const { return varphi_; }
  std::span<const double> phi_table() const { return phi_; }

  /// tau(D) eta^2 - 7/48 psi(D) (eta_x)^2 - 1/8 psi(D) eta^3, dealiased.
  SpectralField nonlinearity(const SpectralField& eta) const;
  /// d/dt eta = -i (phi(D) eta + F(eta)).
  SpectralField rhs(const SpectralField& eta) const;

  SpectralField remainder_n(const SpectralField& v, double sigma) const;
  PairingTerms pairing(const SpectralField& v, double sigma) const;
  /// L sum conj(v_hat) N_hat, the same integral without the I-term split.
  double pairing_direct(const SpectralField& v, double sigma) const;

  double energy(const SpectralField& eta) const;
  EnergyReport energy_report(const SpectralField& eta, double sigma, double time = 0.0) const;

 private:
  void check(const SpectralField& f, const char* where) const;

  SpectralGrid grid_;
  ModelParams params_;
  std::vector<double> varphi_;
  std::vector<double> phi_;
  Multiplier tau_;
  Multiplier psi_;
  Multiplier ddx_;
};

SpectralField nonlinearity_F(const SpectralField& eta, const ModelParams& p);

/// v_sigma = cosh(sigma |D|) eta. Throws OverflowGuardError if the result is
/// not finite (the field is not analytic enough for this sigma).
SpectralField weighted_field(const SpectralField& eta, double sigma);

// N1 = v^2 - cosh[(sech v)^2], N2 = v_x^2 - cosh[(sech v_x)^2],
// N3 = v^3 - cosh[(sech v)^3]; products dealiased, cosh applied on the grid.
SpectralField remainder_N1(const SpectralField& v, double sigma);
SpectralField remainder_N2(const SpectralField& v, double sigma);
SpectralField remainder_N3(const SpectralField& v, double sigma);
/// (3/4 + g d_x^2) d_x N1 - g d_x N2 - 1/8 d_x N3.
SpectralField remainder_N(const SpectralField& v, double sigma, const ModelParams& p);

double energy_E(const SpectralField& eta, const ModelParams& p);
EnergyReport energy_E_sigma(const SpectralField& eta, double sigma, const ModelParams& p);

/// I1 = int (3/4 + g d_x^2) v . d_x N1, I2 = g int v_x N2, I3 = 1/8 int v_x N3,
/// each by trapezoidal quadrature on the grid nodes.
PairingTerms pairing_vN(const SpectralField& v, double sigma, const ModelParams& p);

}  // namespace kdvbbm

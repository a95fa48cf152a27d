#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kdvbbm/field.hpp"
#include "kdvbbm/grid.hpp"

namespace kdvbbm {

// Largest sigma * |xi| at which an exp or cosh weight is materialized.
inline constexpr double kWeightGuard = 600.0;

struct GevreyParams {
  double sigma = 0.0;
  double s = 0.0;
};

enum class WeightKind { cosh, sech, exp, inv_exp, none };

/// Pointwise symbol values on a grid, in coefficient order.
using Multiplier = std::vector<Complex>;
using Symbol = std::function<Complex(double)>;

std::vector<Complex> forward_transform(std::span<const double> samples, const SpectralGrid& grid);
/// Throws SymmetryError when the input is not Hermitian to 1e-12 (relative).
std::vector<double> inverse_transform(std::span<const Complex> coefficients,
                                      const SpectralGrid& grid);

/// Tabulates m(xi_k). The unpaired Nyquist mode is a cosine, so it receives
/// the average of m(+xi_N) and m(-xi_N); odd symbols therefore vanish there.
Multiplier make_multiplier(const SpectralGrid& grid, const Symbol& m);

SpectralField apply_multiplier(const SpectralField& field, const Symbol& m);
SpectralField apply_multiplier(const SpectralField& field, std::span<const Complex> m);
SpectralField apply_multiplier(const SpectralField& field, std::span<const double> m);

/// i xi multiplier (first derivative).
SpectralField derivative(const SpectralField& field, int order = 1);

/// Alias-free product f*g (padded to 2N) or f*g*h (padded to 4N), truncated
/// back to |k| < N/2. The Nyquist entry of the result is zero.
SpectralField dealias_product(const SpectralField& f, const SpectralField& g);
SpectralField dealias_product(const SpectralField& f, const SpectralField& g,
                              const SpectralField& h);

/// Field sampled on a finer grid of `padded_size` points (same box), and the
/// way back. Building blocks for products that reuse the same samples.
std::vector<double> padded_samples(const SpectralField& field, int padded_size);
SpectralField truncate_samples(std::span<const double> samples, const SpectralGrid& grid);

/// Real even weight values on the grid. cosh and exp respect kWeightGuard.
std::vector<double> gevrey_weight(WeightKind kind, double sigma, const SpectralGrid& grid);

/// log cosh(x) without overflow.
double log_cosh(double x);

/// sqrt(L * sum_k W(xi_k)^2 <xi_k>^{2s} |c_k|^2), accumulated in log space.
double weighted_norm(const SpectralField& field, GevreyParams params, WeightKind weight);

/// Shorthand for the H^{sigma,s} norm (cosh weight).
inline double hs_norm(const SpectralField& field, double sigma, double s) {
  return weighted_norm(field, {sigma, s}, WeightKind::cosh);
}

/// L * sum_k conj(f_k) g_k, the L^2 pairing of two real fields.
double inner_product(const SpectralField& f, const SpectralField& g);

}  // namespace kdvbbm

#pragma once

#include <cstdint>
#include <vector>

#include "kdvbbm/field.hpp"

namespace kdvbbm {

/// Random analytic fields: c_k = amplitude * r_k exp(-rho |xi_k|) <xi_k>^-2,
/// r_k standard complex Gaussian, Hermitian-symmetrized, supported on
/// |k| < band_modes. rho is drawn once per field from [rho_min, rho_max].
///
/// Coefficients are indexed by physical mode k, so the same seed gives the
/// same function on any grid of the same length that resolves the band.
struct EnsembleOptions {
  int band_modes = 0;  // 0: N/4
  double amplitude = 0.1;
  double rho_min = 0.2;
  double rho_max = 1.0;
};

SpectralField random_analytic_field(const SpectralGrid& grid, std::uint64_t seed,
                                    const EnsembleOptions& options = {});

/// `count` fields with seeds derived from `seed`; member i is independent of count.
std::vector<SpectralField> random_ensemble(const SpectralGrid& grid, std::uint64_t seed,
                                           int count, const EnsembleOptions& options = {});

/// Localized analytic initial datum: a sum of sech^2 pulses
///   a_j sech^2((x - c_j) / w_j)
/// with a_j, c_j, w_j drawn from the seed. Each pulse extends analytically to
/// the strip |Im x| < pi w_j / 2.
struct PulseOptions {
  int pulses = 3;
  double amplitude_min = 0.2;
  double amplitude_max = 0.6;
  double width_min = 0.8;
  double width_max = 1.2;
  double center_spread = 4.0;  // centers in [-spread, spread]
};

SpectralField pulse_datum(const SpectralGrid& grid, std::uint64_t seed,
                          const PulseOptions& options = {});

}  // namespace kdvbbm

#pragma once

#include <complex>
#include <span>
#include <vector>

#include "kdvbbm/grid.hpp"

namespace kdvbbm {

using Complex = std::complex<double>;

/// A real-valued periodic field held by its Fourier coefficients.
///
/// Coefficients follow the grid's k = -N/2 .. N/2-1 ordering with the
/// normalization eta_hat(k) = (1/N) sum_j eta(x_j) exp(-i xi_k x_j), so the
/// k = 0 entry is the mean. Real-valuedness means eta_hat(-k) = conj(eta_hat(k))
/// and a real Nyquist entry.
class SpectralField {
 public:
  explicit SpectralField(SpectralGrid grid);
  SpectralField(SpectralGrid grid, std::vector<Complex> coefficients);

  static SpectralField zero(const SpectralGrid& grid) { return SpectralField(grid); }
  static SpectralField from_samples(const SpectralGrid& grid, std::span<const double> samples);

  const SpectralGrid& grid() const { return grid_; }
  int size() const { return grid_.size(); }

  std::span<const Complex> coefficients() const { return coefficients_; }
  std::span<Complex> coefficients() { return coefficients_; }
  Complex operator[](int index) const { return coefficients_[static_cast<std::size_t>(index)]; }
  Complex& operator[](int index) { return coefficients_[static_cast<std::size_t>(index)]; }

  std::vector<double> samples() const;

  // max |c(-k) - conj c(k)| (and |Im c(Nyquist)|) relative to max |c|.
  double symmetry_residue() const;
  bool is_finite() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(Complex factor);

 private:
  SpectralGrid grid_;
  std::vector<Complex> coefficients_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(Complex factor, SpectralField a);

// Max coefficient-wise distance; used by tests and convergence studies.
double max_abs_difference(const SpectralField& a, const SpectralField& b);
double max_abs_coefficient(const SpectralField& a);

void require_same_grid(const SpectralField& a, const SpectralField& b, const char* where);

}  // namespace kdvbbm

#include "kdvbbm/field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kdvbbm/error.hpp"
#include "kdvbbm/spectral.hpp"

namespace kdvbbm {

SpectralField::SpectralField(SpectralGrid grid)
    : grid_(std::move(grid)), coefficients_(static_cast<std::size_t>(grid_.size())) {}

SpectralField::SpectralField(SpectralGrid grid, std::vector<Complex> coefficients)
    : grid_(std::move(grid)), coefficients_(std::move(coefficients)) {
  if (static_cast<int>(coefficients_.size()) != grid_.size()) {
    throw std::invalid_argument("field: " + std::to_string(coefficients_.size()) +
                                " coefficients for a grid of " + std::to_string(grid_.size()));
  }
}

SpectralField SpectralField::from_samples(const SpectralGrid& grid,
                                          std::span<const double> samples) {
  return SpectralField(grid, forward_transform(samples, grid));
}

std::vector<double> SpectralField::samples() const {
  return inverse_transform(coefficients_, grid_);
}

double SpectralField::symmetry_residue() const {
  const double scale = max_abs_coefficient(*this);
  if (scale == 0.0) return 0.0;
  double worst = std::abs(coefficients_[0].imag());
  for (int i = 1; i < size(); ++i) {
    const Complex a = coefficients_[static_cast<std::size_t>(i)];
    const Complex b = coefficients_[static_cast<std::size_t>(grid_.mirror_index(i))];
    worst = std::max(worst, std::abs(a - std::conj(b)));
  }
  return worst / scale;
}

bool SpectralField::is_finite() const {
  return std::all_of(coefficients_.begin(), coefficients_.end(), [](Complex c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_grid(*this, other, "field +=");
  for (std::size_t i = 0; i < coefficients_.size(); ++i) coefficients_[i] += other.coefficients_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_grid(*this, other, "field -=");
  for (std::size_t i = 0; i < coefficients_.size(); ++i) coefficients_[i] -= other.coefficients_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(Complex factor) {
  for (auto& c : coefficients_) c *= factor;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(Complex factor, SpectralField a) { return a *= factor; }

double max_abs_difference(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a, b, "max_abs_difference");
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double max_abs_coefficient(const SpectralField& a) {
  double worst = 0.0;
  for (Complex c : a.coefficients()) worst = std::max(worst, std::abs(c));
  return worst;
}

void require_same_grid(const SpectralField& a, const SpectralField& b, const char* where) {
  if (!(a.grid() == b.grid())) {
    throw GridMismatchError(std::string(where) + ": fields live on different grids");
  }
}

}  // namespace kdvbbm

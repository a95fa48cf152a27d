#include "kdvbbm/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kdvbbm {

SpectralGrid::SpectralGrid(int n_modes, double length) : n_(n_modes), length_(length) {
  if (n_modes < 8 || n_modes % 2 != 0) {
    throw std::invalid_argument("grid: n_modes must be even and >= 8, got " +
                                std::to_string(n_modes));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("grid: length must be positive and finite");
  }
  auto xi = std::make_shared<std::vector<double>>(static_cast<std::size_t>(n_modes));
  for (int i = 0; i < n_modes; ++i) {
    (*xi)[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * mode(i) / length;
  }
  xi_ = std::move(xi);
}

double SpectralGrid::max_wavenumber() const { return std::numbers::pi * n_ / length_; }

std::vector<double> SpectralGrid::nodes() const {
  std::vector<double> x(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) x[static_cast<std::size_t>(j)] = -0.5 * length_ + j * spacing();
  return x;
}

SpectralGrid make_grid(int n_modes, double length) { return SpectralGrid(n_modes, length); }

}  // namespace kdvbbm

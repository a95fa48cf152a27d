#pragma once

#include <memory>
#include <span>
#include <vector>

namespace kdvbbm {

/// Uniform periodic grid on [-L/2, L/2) with N collocation points.
///
/// Coefficient arrays are stored in wavenumber order k = -N/2, ..., N/2-1,
/// i.e. array index i holds mode k = i - N/2 with xi_k = 2 pi k / L.
/// The grid is immutable and cheap to copy; copies share the wavenumber table.
class SpectralGrid {
 public:
  SpectralGrid(int n_modes, double length);

  int size() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / n_; }

  std::span<const double> wavenumbers() const { return *xi_; }
  double wavenumber(int index) const { return (*xi_)[static_cast<std::size_t>(index)]; }

  int mode(int index) const { return index - n_ / 2; }
  int index_of_mode(int k) const { return k + n_ / 2; }
  // The unpaired k = -N/2 entry.
  int nyquist_index() const { return 0; }
  // Index of the mode -k for the mode at `index` (Nyquist maps to itself).
  int mirror_index(int index) const { return index == 0 ? 0 : n_ - index; }

  double max_wavenumber() const;
  std::vector<double> nodes() const;

  bool operator==(const SpectralGrid& other) const {
    return n_ == other.n_ && length_ == other.length_;
  }

 private:
  int n_;
  double length_;
  std::shared_ptr<const std::vector<double>> xi_;
};

SpectralGrid make_grid(int n_modes, double length);

}  // namespace kdvbbm

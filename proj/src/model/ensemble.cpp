#include "kdvbbm/ensemble.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace kdvbbm {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

SpectralField random_analytic_field(const SpectralGrid& grid, std::uint64_t seed,
                                    const EnsembleOptions& options) {
  const int band = options.band_modes > 0 ? options.band_modes : grid.size() / 4;
  if (band > grid.size() / 2) {
    throw std::invalid_argument("random_analytic_field: band exceeds the grid's modes");
  }
  if (!(options.rho_min > 0.0) || options.rho_max < options.rho_min) {
    throw std::invalid_argument("random_analytic_field: need 0 < rho_min <= rho_max");
  }
  auto engine = make_engine(seed, 0);
  std::uniform_real_distribution<double> uniform(options.rho_min, options.rho_max);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double rho = uniform(engine);

  SpectralField f(grid);
  for (int k = 0; k < band; ++k) {
    const double xi = grid.wavenumber(grid.index_of_mode(k));
    const double envelope = options.amplitude * std::exp(-rho * std::abs(xi)) / (1.0 + xi * xi);
    const double re = normal(engine);
    const double im = normal(engine);
    if (k == 0) {
      f[grid.index_of_mode(0)] = envelope * re;
      continue;
    }
    const Complex c = envelope * Complex(re, im) / std::sqrt(2.0);
    f[grid.index_of_mode(k)] = c;
    f[grid.index_of_mode(-k)] = std::conj(c);
  }
  return f;
}

std::vector<SpectralField> random_ensemble(const SpectralGrid& grid, std::uint64_t seed,
                                           int count, const EnsembleOptions& options) {
  std::vector<SpectralField> out;
  out.reserve(static_cast<std::size_t>(count));
  auto engine = make_engine(seed, 1);
  for (int i = 0; i < count; ++i) out.push_back(random_analytic_field(grid, engine(), options));
  return out;
}

SpectralField pulse_datum(const SpectralGrid& grid, std::uint64_t seed,
                          const PulseOptions& options) {
  auto engine = make_engine(seed, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unit(engine); };

  const auto x = grid.nodes();
  std::vector<double> samples(x.size(), 0.0);
  for (int p = 0; p < options.pulses; ++p) {
    const double a = draw(options.amplitude_min, options.amplitude_max);
    const double c = draw(-options.center_spread, options.center_spread);
    const double w = draw(options.width_min, options.width_max);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double s = 1.0 / std::cosh((x[j] - c) / w);
      samples[j] += a * s * s;
    }
  }
  return SpectralField::from_samples(grid, samples);
}

}  // namespace kdvbbm

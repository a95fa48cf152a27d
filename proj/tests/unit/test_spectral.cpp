#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kdvbbm/error.hpp"
#include "kdvbbm/spectral.hpp"
#include "oracle.hpp"

using namespace kdvbbm;

namespace {

std::vector<double> sample(const SpectralGrid& g, double (*f)(double)) {
  std::vector<double> out;
  for (double x : g.nodes()) out.push_back(f(x));
  return out;
}

}  // namespace

TEST_CASE("grid layout") {
  SpectralGrid g(8, 2 * std::numbers::pi);
  CHECK(g.mode(0) == -4);
  CHECK(g.index_of_mode(0) == 4);
  CHECK(g.wavenumber(0) == doctest::Approx(-4.0));
  CHECK(g.wavenumber(7) == doctest::Approx(3.0));
  CHECK(g.mirror_index(5) == 3);
  CHECK(g.mirror_index(0) == 0);
  CHECK(g.nodes().front() == doctest::Approx(-std::numbers::pi));
  CHECK_THROWS(SpectralGrid(7, 1.0));
  CHECK_THROWS(SpectralGrid(8, -1.0));
}

TEST_CASE("transform round trip and mean") {
  SpectralGrid g(64, 10.0);
  auto s = sample(g, [](double x) { return 1.5 + std::sin(2 * std::numbers::pi * x / 10.0) + 0.2 * std::cos(4 * std::numbers::pi * x / 10.0); });
  auto f = SpectralField::from_samples(g, s);
  CHECK(f[g.index_of_mode(0)].real() == doctest::Approx(1.5).epsilon(1e-12));
  auto back = f.samples();
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(back[i] == doctest::Approx(s[i]).epsilon(1e-13));
  CHECK(f.symmetry_residue() < 1e-14);
}

TEST_CASE("inverse transform rejects non-Hermitian input") {
  SpectralGrid g(16, 1.0);
  SpectralField f(g);
  f[g.index_of_mode(2)] = Complex(1.0, 0.0);
  CHECK_THROWS_AS(f.samples(), SymmetryError);
}

TEST_CASE("spectral derivative of a resolved sine") {
  const double L = 2 * std::numbers::pi;
  SpectralGrid g(32, L);
  auto f = SpectralField::from_samples(g, sample(g, [](double x) { return std::sin(3 * x); }));
  auto d = derivative(f).samples();
  auto d3 = derivative(f, 3).samples();
  auto x = g.nodes();
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(d[i] == doctest::Approx(3 * std::cos(3 * x[i])).epsilon(1e-12).scale(1));
    CHECK(d3[i] == doctest::Approx(-27 * std::cos(3 * x[i])).epsilon(1e-12).scale(27));
  }
}

TEST_CASE("odd multipliers vanish on the Nyquist cosine") {
  SpectralGrid g(16, 2 * std::numbers::pi);
  auto m = make_multiplier(g, [](double xi) { return Complex(0.0, xi); });
  CHECK(std::abs(m[0]) == 0.0);
  auto e = make_multiplier(g, [](double xi) { return Complex(xi * xi); });
  CHECK(e[0].real() == doctest::Approx(64.0));
  // cos(8x) sampled on 16 points is the pure Nyquist mode; its derivative is 0 at the nodes
  auto f = SpectralField::from_samples(g, sample(g, [](double x) { return std::cos(8 * x); }));
  CHECK(std::abs(f[0]) == doctest::Approx(1.0));
  CHECK(max_abs_coefficient(derivative(f)) == 0.0);
}

TEST_CASE("dealiased products match direct convolution") {
  for (int n : {8, 16, 32}) {
    SpectralGrid g(n, 12.0);
    for (unsigned seed = 1; seed <= 5; ++seed) {
      auto a = oracle::full_band_field(g, seed);
      auto b = oracle::full_band_field(g, seed + 100);
      auto c = oracle::full_band_field(g, seed + 200);
      CHECK(max_abs_difference(dealias_product(a, b), oracle::product(a, b)) < 1e-15);
      CHECK(max_abs_difference(dealias_product(a, b, c), oracle::product(a, b, c)) < 1e-15);
      CHECK(std::abs(dealias_product(a, b)[0]) == 0.0);
    }
  }
}

TEST_CASE("padding keeps the field") {
  SpectralGrid g(16, 3.0);
  auto f = oracle::full_band_field(g, 9);
  auto s = padded_samples(f, 64);
  auto back = truncate_samples(s, g);
  // the Nyquist cosine is split over +-N/2 on the fine grid and dropped on the way back
  f[0] = 0.0;
  CHECK(max_abs_difference(back, f) < 1e-15);
  CHECK_THROWS(padded_samples(f, 8));
}

TEST_CASE("norms") {
  const double L = 2 * std::numbers::pi;
  SpectralGrid g(32, L);
  auto one = SpectralField::from_samples(g, sample(g, [](double) { return 1.0; }));
  // ||1||_{L2}^2 = L
  CHECK(hs_norm(one, 0.0, 0.0) == doctest::Approx(std::sqrt(L)));
  CHECK(hs_norm(one, 2.0, 3.0) == doctest::Approx(std::sqrt(L)));
  auto s = SpectralField::from_samples(g, sample(g, [](double x) { return std::sin(2 * x); }));
  CHECK(hs_norm(s, 0.0, 0.0) == doctest::Approx(std::sqrt(L / 2)));
  CHECK(hs_norm(s, 0.0, 2.0) == doctest::Approx(5.0 * std::sqrt(L / 2)));
  CHECK(hs_norm(s, 0.5, 0.0) == doctest::Approx(std::cosh(1.0) * std::sqrt(L / 2)));
  CHECK(weighted_norm(s, {0.5, 0.0}, WeightKind::exp) == doctest::Approx(std::exp(1.0) * std::sqrt(L / 2)));
  CHECK(inner_product(s, s) == doctest::Approx(L / 2));
}

TEST_CASE("log-space norms survive weights that overflow directly") {
  SpectralGrid g(64, 2 * std::numbers::pi);
  SpectralField f(g);
  f[g.index_of_mode(20)] = Complex(1e-300, 0);
  f[g.index_of_mode(-20)] = Complex(1e-300, 0);
  // cosh(35 * 20) ~ e^700 overflows, the product does not
  const double n = hs_norm(f, 35.0, 0.0);
  CHECK(std::isfinite(n));
  CHECK(std::log(n) == doctest::Approx(std::log(1e-300) + 700 - std::log(2.0) + 0.5 * std::log(4 * std::numbers::pi)).epsilon(1e-10));
  CHECK_THROWS_AS(gevrey_weight(WeightKind::cosh, 35.0, g), OverflowGuardError);
  CHECK(log_cosh(1000.0) == doctest::Approx(1000.0 - std::log(2.0)));
  CHECK(log_cosh(0.0) == 0.0);
}

TEST_CASE("grid mismatch is an error") {
  SpectralField a(SpectralGrid(16, 1.0)), b(SpectralGrid(16, 2.0));
  CHECK_THROWS_AS(dealias_product(a, b), GridMismatchError);
  CHECK_THROWS_AS(a += b, GridMismatchError);
}

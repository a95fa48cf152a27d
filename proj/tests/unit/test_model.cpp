#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kdvbbm/ensemble.hpp"
#include "kdvbbm/fit.hpp"
#include "kdvbbm/model.hpp"
#include "kdvbbm/solver.hpp"
#include "oracle.hpp"

using namespace kdvbbm;

namespace {

ModelParams sample_params() {
  ModelParams p;
  p.gamma = 0.3;
  p.gamma1 = 0.7;
  p.gamma2 = 0.4;
  p.delta1 = 1.3;
  p.delta2 = 0.2;
  return p;
}

}  // namespace

TEST_CASE("symbols") {
  ModelParams p = sample_params();
  CHECK(varphi(0.0, p) == 1.0);
  for (double xi : {-7.0, -1.0, 0.3, 2.0, 40.0}) {
    CHECK(varphi(xi, p) >= 1.0);
    CHECK(dispersion_phi(-xi, p) == doctest::Approx(-dispersion_phi(xi, p)));
    CHECK(symbol_tau(-xi, p) == doctest::Approx(-symbol_tau(xi, p)));
    CHECK(symbol_psi(-xi, p) == doctest::Approx(-symbol_psi(xi, p)));
  }
  CHECK(symbol_tau(2.0, p) == doctest::Approx(2.0 * (3 - 4 * 0.3 * 4) / (4 * varphi(2.0, p))));
  CHECK(dispersion_phi(2.0, p) == doctest::Approx(2.0 * (1 - 0.4 * 4 + 0.2 * 16) / varphi(2.0, p)));
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.delta1 = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("delta1"), std::invalid_argument);
  p.delta1 = 1.0;
  p.gamma1 = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK(ModelParams{}.conservative_case());
  CHECK_FALSE(sample_params().conservative_case());
}

TEST_CASE("nonlinearity matches direct convolution") {
  const ModelParams p = sample_params();
  for (int n : {16, 32, 64}) {
    SpectralGrid g(n, 20.0);
    for (unsigned seed = 0; seed < 4; ++seed) {
      auto eta = oracle::full_band_field(g, 40 + seed);
      auto ref = oracle::nonlinearity(eta, p);
      CHECK(max_abs_difference(nonlinearity_F(eta, p), ref) <= 1e-14 * std::max(1.0, max_abs_coefficient(ref)));
    }
  }
}

TEST_CASE("remainders match direct convolution") {
  const ModelParams p = sample_params();
  SpectralGrid g(32, 16.0);
  for (double sigma : {0.05, 0.4}) {
    auto v = oracle::full_band_field(g, 77);
    CHECK(max_abs_difference(remainder_N1(v, sigma), oracle::n1(v, sigma)) < 1e-14);
    CHECK(max_abs_difference(remainder_N2(v, sigma), oracle::n2(v, sigma)) < 1e-13);
    CHECK(max_abs_difference(remainder_N3(v, sigma), oracle::n3(v, sigma)) < 1e-14);
    auto ref = oracle::remainder(v, sigma, p);
    CHECK(max_abs_difference(remainder_N(v, sigma, p), ref) <= 1e-13 * std::max(1.0, max_abs_coefficient(ref)));
  }
}

TEST_CASE("remainders vanish at sigma = 0") {
  SpectralGrid g(32, 16.0);
  auto v = random_analytic_field(g, 3);
  CHECK(max_abs_coefficient(remainder_N(v, 0.0, ModelParams{})) < 1e-16);
}

TEST_CASE("nonlinearity keeps odd-multiplier structure and reality") {
  SpectralGrid g(64, 30.0);
  auto eta = random_analytic_field(g, 11);
  auto f = nonlinearity_F(eta, ModelParams{});
  // real odd symbols: F itself is skew-Hermitian, i F is a real field
  CHECK((Complex(0, 1) * f).symmetry_residue() < 1e-14);
  CHECK(f.symmetry_residue() > 1.0);
  CHECK(rhs(eta, ModelParams{}).symmetry_residue() < 1e-14);
  CHECK(std::abs(f[g.index_of_mode(0)]) < 1e-18);  // tau(0) = psi(0) = 0
  CHECK(std::abs(f[0]) == 0.0);
}

TEST_CASE("energy of a single mode") {
  const double L = 2 * std::numbers::pi;
  SpectralGrid g(16, L);
  ModelParams p = sample_params();
  SpectralField f(g);
  f[g.index_of_mode(2)] = Complex(0.5, 0);
  f[g.index_of_mode(-2)] = Complex(0.5, 0);  // cos(2x)
  // E = 1/2 int varphi(D) eta . eta = 1/2 varphi(2) L / 2
  CHECK(energy_E(f, p) == doctest::Approx(0.5 * varphi(2.0, p) * L / 2));
  auto r = energy_E_sigma(f, 0.3, p);
  CHECK(r.modified_energy == doctest::Approx(std::pow(std::cosh(0.6), 2) * energy_E(f, p)));
  CHECK(r.equivalence_holds);
  CHECK(energy_E(SpectralField(g), p) == 0.0);
}

TEST_CASE("modified energy equivalence across an ensemble") {
  SpectralGrid g(64, 32.0);
  for (const auto& p : {ModelParams{}, sample_params()}) {
    for (const auto& f : random_ensemble(g, 5, 20)) {
      for (double s : {0.0, 0.1, 1.0}) CHECK(energy_E_sigma(f, s, p).equivalence_holds);
    }
  }
}

TEST_CASE("pairing split agrees with the direct pairing") {
  SpectralGrid g(64, 32.0);
  for (const auto& p : {ModelParams{}, sample_params()}) {
    Model m(g, p);
    for (const auto& v : random_ensemble(g, 8, 10)) {
      for (double s : {0.01, 0.1}) {
        auto t = m.pairing(v, s);
        const double d = m.pairing_direct(v, s);
        CHECK(t.total == doctest::Approx(d).epsilon(1e-10).scale(1e-30));
        CHECK(t.total == doctest::Approx(t.i1 + t.i2 + t.i3));
      }
    }
  }
}

TEST_CASE("pairing scales like sigma^2 for small sigma") {
  SpectralGrid g(64, 32.0);
  Model m(g, ModelParams{});
  auto v = random_analytic_field(g, 21, {0, 0.3, 0.3, 0.5});
  std::vector<double> s{1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2};
  std::vector<double> y;
  for (double x : s) y.push_back(std::abs(m.pairing(v, x).total));
  CHECK(loglog_fit(s, y).slope == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("weighted field guard") {
  SpectralGrid g(64, 2 * std::numbers::pi);
  auto v = random_analytic_field(g, 1);
  CHECK(max_abs_difference(weighted_field(v, 0.0), v) == 0.0);
  CHECK_THROWS(weighted_field(v, -1.0));
}

TEST_CASE("norms do not depend on the box for localized data") {
  auto a = pulse_datum(SpectralGrid(512, 64.0), 20240601);
  auto b = pulse_datum(SpectralGrid(1024, 128.0), 20240601);
  for (double s : {0.0, 0.3}) {
    CHECK(hs_norm(a, s, 2.0) == doctest::Approx(hs_norm(b, s, 2.0)).epsilon(1e-10));
  }
  CHECK(energy_E(a, ModelParams{}) == doctest::Approx(energy_E(b, ModelParams{})).epsilon(1e-10));
}

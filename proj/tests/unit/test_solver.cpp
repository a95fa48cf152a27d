#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kdvbbm/ensemble.hpp"
#include "kdvbbm/solver.hpp"

using namespace kdvbbm;

namespace {

SpectralField integrate(const SpectralField& eta0, double t, int steps, const Model& m) {
  SpectralField s = eta0;
  for (int i = 0; i < steps; ++i) s = step_ifrk4(s, t / steps, m);
  return s;
}

}  // namespace

TEST_CASE("local timespan") {
  CHECK(local_timespan(0.0, 0.5) == doctest::Approx(1.0));
  CHECK(local_timespan(2.0, 0.5) == doctest::Approx(0.25));
  CHECK_THROWS(local_timespan(1.0, 0.0));
  CHECK_THROWS(local_timespan(-1.0, 1.0));
}

TEST_CASE("method names") {
  CHECK(method_from_string("picard") == Method::picard);
  CHECK(std::string(to_string(Method::rk4)) == "rk4");
  CHECK_THROWS(method_from_string("euler"));
}

TEST_CASE("zero field is a fixed point") {
  SpectralGrid g(32, 10.0);
  Model m(g, ModelParams{});
  CHECK(max_abs_coefficient(step_ifrk4(SpectralField(g), 0.1, m)) == 0.0);
  auto pr = picard_iterate(SpectralField(g), 0.5, 17, 10, ModelParams{});
  CHECK(pr.converged);
  CHECK(max_abs_coefficient(pr.final_state()) == 0.0);
}

TEST_CASE("linear propagation is exact") {
  // a pure mean carries no dynamics; a tiny mode only rotates by exp(-i phi t)
  SpectralGrid g(32, 2 * std::numbers::pi);
  ModelParams p;
  p.gamma2 = 0.5;
  Model m(g, p);
  SpectralField f(g);
  f[g.index_of_mode(3)] = Complex(1e-9, 0);
  f[g.index_of_mode(-3)] = Complex(1e-9, 0);
  const double t = 0.7;
  auto out = integrate(f, t, 7, m);
  const Complex expect = 1e-9 * std::exp(Complex(0, -dispersion_phi(3.0, p) * t));
  CHECK(std::abs(out[g.index_of_mode(3)] - expect) < 1e-9 * 1e-8);
}

TEST_CASE("IFRK4 is fourth order") {
  SpectralGrid g(64, 32.0);
  Model m(g, ModelParams{});
  auto eta = random_analytic_field(g, 17, {0, 0.8, 0.3, 0.3});
  const double t = 1.0;
  auto ref = integrate(eta, t, 640, m);
  std::vector<double> err;
  for (int steps : {10, 20, 40}) err.push_back(max_abs_difference(integrate(eta, t, steps, m), ref));
  const double o1 = std::log2(err[0] / err[1]);
  const double o2 = std::log2(err[1] / err[2]);
  CHECK(o1 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(o2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("classical RK4 agrees with IFRK4") {
  SpectralGrid g(32, 32.0);
  Model m(g, ModelParams{});
  auto eta = random_analytic_field(g, 2);
  SpectralField a = eta, b = eta;
  for (int i = 0; i < 200; ++i) {
    a = step_ifrk4(a, 1e-3, m);
    b = step_rk4(b, 1e-3, m);
  }
  CHECK(max_abs_difference(a, b) < 1e-12);
}

TEST_CASE("evolve records and conserves") {
  SpectralGrid g(64, 32.0);
  auto eta = random_analytic_field(g, 4, {0, 0.3, 0.2, 0.5});
  SolverConfig c;
  c.dt = 1e-2;
  c.t_end = 2.0;
  c.observer_stride = 50;
  auto tr = evolve(eta, c, ModelParams{}, {0.0, 0.1});
  CHECK(tr.status == RunStatus::completed);
  REQUIRE(tr.times.size() == 5);
  CHECK(tr.times.back() == doctest::Approx(2.0));
  CHECK(tr.snapshots.size() == 5);
  REQUIRE(tr.reports[0].size() == 2);
  const double e0 = tr.reports.front()[0].energy;
  CHECK(std::abs(tr.reports.back()[0].energy - e0) < 1e-12 * e0);

  c.t_end = 0.0;
  auto single = evolve(eta, c, ModelParams{}, {0.0});
  CHECK(single.times.size() == 1);
  CHECK(max_abs_difference(single.snapshots[0], eta) == 0.0);

  c.dt = -1.0;
  CHECK_THROWS(evolve(eta, c, ModelParams{}, {0.0}));
}

TEST_CASE("evolve is deterministic") {
  SpectralGrid g(32, 16.0);
  auto eta = random_analytic_field(g, 9);
  SolverConfig c;
  c.dt = 1e-2;
  c.t_end = 0.3;
  auto a = evolve(eta, c, ModelParams{}, {0.0});
  auto b = evolve(eta, c, ModelParams{}, {0.0});
  CHECK(max_abs_difference(a.snapshots.back(), b.snapshots.back()) == 0.0);
}

TEST_CASE("Picard iteration contracts and agrees with IFRK4") {
  SpectralGrid g(64, 32.0);
  ModelParams p;
  auto eta = random_analytic_field(g, 6);
  const double t = 0.5;
  auto pr = picard_iterate(eta, t, 65, 60, p, 0.1);
  CHECK(pr.converged);
  CHECK_FALSE(pr.diverged);
  CHECK(pr.node_times.back() == doctest::Approx(t));
  for (std::size_t k = 1; k < pr.ratios.size(); ++k) CHECK(pr.ratios[k] < 0.5);
  Model m(g, p);
  CHECK(max_abs_difference(pr.final_state(), integrate(eta, t, 500, m)) < 1e-9);
}

TEST_CASE("Picard iteration diverges for large data") {
  SpectralGrid g(64, 32.0);
  auto eta = random_analytic_field(g, 6, {0, 300.0, 0.2, 0.2});
  auto pr = picard_iterate(eta, 2.0, 17, 40, ModelParams{}, 0.0, false);
  CHECK(pr.diverged);
  CHECK_FALSE(pr.converged);
}

TEST_CASE("continuation sigma") {
  CHECK(continuation_sigma(0.5, 100.0, 3.0, 0.5) == doctest::Approx(0.15));
  CHECK(continuation_sigma(0.5, 0.01, 3.0, 0.5) == doctest::Approx(0.5));
  const double c = 0.01, e = 2.0;
  CHECK(continuation_constant(c, e) == doctest::Approx(1.0 / std::sqrt(c * (1 + 2.0) * 2.0)));
  CHECK_THROWS(continuation_constant(0.0, 1.0));
}

TEST_CASE("continuation covers the interval") {
  SpectralGrid g(64, 32.0);
  auto eta = random_analytic_field(g, 12);
  SolverConfig c;
  c.dt = 1e-2;
  c.observer_stride = 10;
  auto r = continuation_run(eta, 0.5, 5.0, ModelParams{}, 0.5, 3.0, c);
  CHECK(r.status == RunStatus::completed);
  CHECK(r.sigma == doctest::Approx(std::min(0.5, 1.5 / std::sqrt(5.0))));
  REQUIRE_FALSE(r.intervals.empty());
  double covered = 0;
  for (const auto& iv : r.intervals) covered += iv.length;
  CHECK(covered == doctest::Approx(5.0));
  CHECK(r.bound_holds);
  CHECK(r.sup_modified_energy <= 2 * r.initial_energy_sigma0);
}

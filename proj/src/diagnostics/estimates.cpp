#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kdvbbm/diagnostics.hpp"
#include "kdvbbm/error.hpp"
#include "kdvbbm/parallel.hpp"
#include "kdvbbm/spectral.hpp"

namespace kdvbbm {

namespace {

std::string member_label(const EnsembleSpec& e, int member, double sigma) {
  std::ostringstream os;
  os.precision(17);
  os << "seed=" << e.seed << " member=" << member << " sigma=" << sigma;
  return os.str();
}

struct Sample {
  double total = 0.0, i1 = 0.0, i2 = 0.0, i3 = 0.0;
};

void fold(RatioReport& r, double ratio, const std::string& where) {
  ++r.sample_count;
  if (!std::isfinite(ratio)) ++r.violations;
  if (ratio > r.max_ratio || !std::isfinite(ratio)) {
    r.max_ratio = ratio;
    r.argmax_input = where;
  }
}

double spread(std::span<const double> xs) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double x : xs) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (hi == 0.0) return 1.0;
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

KeyLemmaReport key_lemma_ratio(const EnsembleSpec& ensemble, std::span<const double> sigma_grid,
                               const ModelParams& p) {
  if (sigma_grid.empty()) throw std::invalid_argument("key_lemma_ratio: empty sigma grid");
  const Model model(ensemble.grid, p);
  const auto members = random_ensemble(ensemble.grid, ensemble.seed, ensemble.count, ensemble.options);
  const std::size_t ns = sigma_grid.size();

  std::vector<std::vector<Sample>> ratios(members.size(), std::vector<Sample>(ns));
  std::vector<std::vector<double>> totals(members.size(), std::vector<double>(ns));
  parallel_for(static_cast<int>(members.size()), ensemble.threads, [&](int m) {
    const auto& v = members[static_cast<std::size_t>(m)];
    const double h2 = hs_norm(v, 0.0, 2.0);
    for (std::size_t s = 0; s < ns; ++s) {
      const double sigma = sigma_grid[s];
      const PairingTerms t = model.pairing(v, sigma);
      totals[static_cast<std::size_t>(m)][s] = std::abs(t.total);
      Sample& r = ratios[static_cast<std::size_t>(m)][s];
      if (h2 == 0.0) continue;  // zero field: ratios are 0 by convention
      const double s2 = sigma * sigma;
      r.total = std::abs(t.total) / (s2 * (1.0 + h2) * h2 * h2 * h2);
      r.i1 = std::abs(t.i1) / (s2 * h2 * h2 * h2);
      r.i2 = std::abs(t.i2) / (s2 * h2 * h2 * h2);
      r.i3 = std::abs(t.i3) / (s2 * h2 * h2 * h2 * h2);
    }
  });

  KeyLemmaReport report;
  report.total.name = "pairing_vN";
  report.i1.name = "I1";
  report.i2.name = "I2";
  report.i3.name = "I3";
  for (RatioReport* r : {&report.total, &report.i1, &report.i2, &report.i3}) {
    r->parameters["ensemble_seed"] = static_cast<double>(ensemble.seed);
    r->parameters["ensemble_size"] = ensemble.count;
    r->parameters["grid_n"] = ensemble.grid.size();
    r->parameters["grid_length"] = ensemble.grid.length();
    r->parameters["sigma_min"] = sigma_grid.front();
    r->parameters["sigma_max"] = sigma_grid.back();
  }
  report.min_slope = std::numeric_limits<double>::infinity();
  report.max_slope = -std::numeric_limits<double>::infinity();
  std::vector<double> sup_total(ns, 0.0), sup_i1(ns, 0.0), sup_i2(ns, 0.0), sup_i3(ns, 0.0);
  for (std::size_t m = 0; m < members.size(); ++m) {
    std::vector<double> per_total(ns), per_i1(ns), per_i2(ns), per_i3(ns);
    for (std::size_t s = 0; s < ns; ++s) {
      const Sample& r = ratios[m][s];
      const auto where = member_label(ensemble, static_cast<int>(m), sigma_grid[s]);
      fold(report.total, r.total, where);
      fold(report.i1, r.i1, where);
      fold(report.i2, r.i2, where);
      fold(report.i3, r.i3, where);
      per_total[s] = r.total;
      per_i1[s] = r.i1;
      per_i2[s] = r.i2;
      per_i3[s] = r.i3;
      sup_total[s] = std::max(sup_total[s], r.total);
      sup_i1[s] = std::max(sup_i1[s], r.i1);
      sup_i2[s] = std::max(sup_i2[s], r.i2);
      sup_i3[s] = std::max(sup_i3[s], r.i3);
    }
    report.worst_sigma_spread = std::max(report.worst_sigma_spread, spread(per_total));
    report.worst_i1_spread = std::max(report.worst_i1_spread, spread(per_i1));
    report.worst_i2_spread = std::max(report.worst_i2_spread, spread(per_i2));
    report.worst_i3_spread = std::max(report.worst_i3_spread, spread(per_i3));
    const bool fittable = ns >= 3 && std::all_of(totals[m].begin(), totals[m].end(),
                                                 [](double x) { return x > 0.0; });
    if (fittable) {
      const double slope = loglog_fit(sigma_grid, totals[m]).slope;
      report.field_slopes.push_back(slope);
      report.min_slope = std::min(report.min_slope, slope);
      report.max_slope = std::max(report.max_slope, slope);
    }
  }
  report.sup_spread_total = spread(sup_total);
  report.sup_spread_i1 = spread(sup_i1);
  report.sup_spread_i2 = spread(sup_i2);
  report.sup_spread_i3 = spread(sup_i3);
  return report;
}

RatioReport nonlinear_estimate_ratio(const EnsembleSpec& ensemble,
                                     std::span<const double> sigma_grid, const ModelParams& p,
                                     double scale) {
  const Model model(ensemble.grid, p);
  auto members = random_ensemble(ensemble.grid, ensemble.seed, ensemble.count, ensemble.options);
  for (auto& f : members) f *= scale;
  const std::size_t ns = sigma_grid.size();
  std::vector<std::vector<double>> ratios(members.size(), std::vector<double>(ns, 0.0));
  parallel_for(static_cast<int>(members.size()), ensemble.threads, [&](int m) {
    const auto& eta = members[static_cast<std::size_t>(m)];
    const SpectralField f = model.nonlinearity(eta);
    for (std::size_t s = 0; s < ns; ++s) {
      const double n = hs_norm(eta, sigma_grid[s], 2.0);
      if (n == 0.0) continue;
      ratios[static_cast<std::size_t>(m)][s] = hs_norm(f, sigma_grid[s], 2.0) / ((1.0 + n) * n * n);
    }
  });

  RatioReport report;
  report.name = "nonlinear_estimate";
  report.parameters["ensemble_seed"] = static_cast<double>(ensemble.seed);
  report.parameters["ensemble_size"] = ensemble.count;
  report.parameters["grid_n"] = ensemble.grid.size();
  report.parameters["grid_length"] = ensemble.grid.length();
  report.parameters["scale"] = scale;
  for (std::size_t s = 0; s < ns; ++s) {
    double best = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) {
      fold(report, ratios[m][s], member_label(ensemble, static_cast<int>(m), sigma_grid[s]));
      best = std::max(best, ratios[m][s]);
    }
    std::ostringstream key;
    key << "max_ratio@" << sigma_grid[s];
    report.parameters[key.str()] = best;
  }
  return report;
}

DerivativeCheck energy_derivative_check(const Trajectory& trajectory, double sigma,
                                        const ModelParams& p) {
  const std::size_t n = trajectory.snapshots.size();
  if (n < 5 || trajectory.times.size() != n) {
    throw InsufficientDataError("energy_derivative_check: need >= 5 recorded snapshots");
  }
  const double h = trajectory.times[1] - trajectory.times[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(trajectory.times[i] - trajectory.times[i - 1] - h) > 1e-9 * std::max(1.0, h)) {
      throw std::invalid_argument("energy_derivative_check: snapshots must be uniformly spaced");
    }
  }
  const Model model(trajectory.snapshots.front().grid(), p);
  std::vector<double> energy(n), pairing(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& eta = trajectory.snapshots[i];
    energy[i] = model.energy_report(eta, sigma).modified_energy;
    pairing[i] = model.pairing_direct(weighted_field(eta, sigma), sigma);
  }

  DerivativeCheck check;
  check.step = h;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double fine = (energy[i + 1] - energy[i - 1]) / (2.0 * h);
    const double coarse = (energy[i + 2] - energy[i - 2]) / (4.0 * h);
    check.residual_fine = std::max(check.residual_fine, std::abs(fine - pairing[i]));
    check.residual_coarse = std::max(check.residual_coarse, std::abs(coarse - pairing[i]));
  }
  for (double v : pairing) check.max_pairing = std::max(check.max_pairing, std::abs(v));

  double integral = 0.0;
  for (std::size_t i = 2; i < n; i += 2) {
    integral += h / 3.0 * (pairing[i - 2] + 4.0 * pairing[i - 1] + pairing[i]);
    const double change = energy[i] - energy[0];
    check.integrated_residual = std::max(check.integrated_residual, std::abs(change - integral));
    check.max_energy_change = std::max(check.max_energy_change, std::abs(change));
  }

  if (check.residual_fine > 0.0) {
    check.reduction = check.residual_coarse / check.residual_fine;
    check.resolution_insufficient = check.reduction < 3.0 || check.reduction > 5.0;
  }
  check.report.name = "energy_derivative_identity";
  check.report.sample_count = static_cast<long>(n) - 4;
  // ~1 for a second-order difference quotient: residual(h) / (residual(2h) / 4)
  check.report.max_ratio = check.reduction > 0.0 ? 4.0 / check.reduction : 0.0;
  check.report.violations = check.resolution_insufficient ? 1 : 0;
  check.report.parameters["sigma"] = sigma;
  check.report.parameters["step"] = h;
  check.report.parameters["residual_fine"] = check.residual_fine;
  check.report.parameters["residual_coarse"] = check.residual_coarse;
  check.report.parameters["reduction"] = check.reduction;
  check.report.parameters["integrated_residual"] = check.integrated_residual;
  return check;
}

AlmostConservationReport almost_conservation_experiment(const SpectralField& eta0,
                                                        std::span<const double> sigma_list,
                                                        double t_span, const ModelParams& p,
                                                        const SolverConfig& solver) {
  if (sigma_list.size() < 3) {
    throw InsufficientDataError("almost_conservation_experiment: need >= 3 sigma values");
  }
  SolverConfig config = solver;
  config.t_end = t_span;
  config.keep_snapshots = false;
  const std::vector<double> sigmas(sigma_list.begin(), sigma_list.end());
  const Trajectory traj = evolve(eta0, config, p, sigmas);
  if (traj.status != RunStatus::completed) {
    throw std::runtime_error("almost_conservation_experiment: " + traj.message);
  }

  AlmostConservationReport rep;
  rep.t_span = t_span;
  rep.sigmas = sigmas;
  std::vector<double> fx, fy;
  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    const double e0 = traj.reports.front()[s].modified_energy;
    std::vector<double> sup_at(rep.span_fractions.size(), 0.0);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const double dev = std::abs(traj.reports[i][s].modified_energy - e0);
      for (std::size_t f = 0; f < rep.span_fractions.size(); ++f) {
        if (traj.times[i] <= rep.span_fractions[f] * t_span * (1.0 + 1e-12)) {
          sup_at[f] = std::max(sup_at[f], dev);
        }
      }
    }
    const double d = sup_at.back();
    rep.initial_energies.push_back(e0);
    rep.deviations.push_back(d);
    rep.span_deviations.push_back(sup_at);
    for (std::size_t f = 1; f < sup_at.size(); ++f) {
      if (sup_at[f - 1] > 0.0) {
        rep.max_doubling_growth = std::max(rep.max_doubling_growth, sup_at[f] / sup_at[f - 1]);
      }
    }
    // Deviations under 1e-13 are at the quadrature floor.
    const bool usable = sigmas[s] > 0.0 && d > 1e-13;
    rep.used_in_fit.push_back(usable);
    if (usable) {
      fx.push_back(sigmas[s]);
      fy.push_back(d);
      const double root = std::sqrt(e0);
      rep.almost_conservation_c =
          std::max(rep.almost_conservation_c,
                   d / (sigmas[s] * sigmas[s] * t_span * (1.0 + root) * e0 * root));
    }
  }
  rep.fit = loglog_fit(fx, fy);
  return rep;
}

}  // namespace kdvbbm

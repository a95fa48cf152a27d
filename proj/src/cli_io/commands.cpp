#include "kdvbbm/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "kdvbbm/diagnostics.hpp"
#include "kdvbbm/error.hpp"
#include "kdvbbm/io.hpp"
#include "kdvbbm/parallel.hpp"
#include "kdvbbm/spectral.hpp"

namespace kdvbbm {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) { return format_double(v); }

// JSON cannot hold NaN/inf; store them as strings.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); }

Json ratio_json(const RatioReport& r) {
  Json params = Json::object();
  for (const auto& [k, v] : r.parameters) params[k] = num(v);
  return {{"name", r.name},
          {"max_ratio", num(r.max_ratio)},
          {"argmax_input", r.argmax_input},
          {"sample_count", r.sample_count},
          {"violations", r.violations},
          {"holds", r.holds()},
          {"parameters", params}};
}

Json fit_json(const FitReport& f) {
  return {{"slope", num(f.slope)},
          {"intercept", num(f.intercept)},
          {"r_squared", num(f.r_squared)},
          {"points", f.points.size()}};
}

// Largest |eta| over the outer tenth of the box on each side. Small values
// mean the periodic box is a fair stand-in for the line.
double boundary_max(const SpectralField& f) {
  const auto x = f.grid().nodes();
  const auto v = f.samples();
  const double edge = 0.4 * f.grid().length();
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) >= edge) m = std::max(m, std::abs(v[i]));
  return m;
}

class Run {
 public:
  Run(std::string command, const Config& config, const RunOptions& options)
      : cfg(config), opts(options) {
    result.command = std::move(command);
    fs::create_directories(opts.out_dir);
  }

  const Config& cfg;
  const RunOptions& opts;
  CommandResult result;
  Json report = Json::object();

  void log(const std::string& line) const {
    if (!opts.quiet) std::cerr << "[" << result.command << "] " << line << "\n";
  }

  void check(const std::string& name, bool passed, const std::string& detail) {
    result.checks.push_back({name, passed, detail});
    log(std::string(passed ? "PASS " : "FAIL ") + name + ": " + detail);
  }

  void metric(const std::string& name, double value) { result.metrics.emplace_back(name, value); }

  fs::path path(const std::string& rel) const { return opts.out_dir / rel; }

  void record(const std::string& rel) { result.outputs.push_back({rel, sha256_file(path(rel))}); }

  void series(const std::string& rel, const Series& s) {
    write_series(s, path(rel));
    record(rel);
  }

  void table(const std::string& rel, const std::vector<std::string>& columns,
             const std::vector<std::vector<std::string>>& rows) {
    write_table(columns, rows, path(rel));
    record(rel);
  }

  void snapshot(const std::string& rel, const SpectralField& f, double t) {
    write_snapshot(f, {t, cfg.params, cfg.sigma_observe}, path(rel));
    record(rel);
  }

  // report.json: deterministic content only (no times, no dates).
  void finish_report() {
    Json checks = Json::array();
    for (const auto& c : result.checks) {
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    Json metrics = Json::object();
    for (const auto& [k, v] : result.metrics) metrics[k] = num(v);
    Json out = {{"command", result.command},
                {"passed", result.passed()},
                {"checks", checks},
                {"metrics", metrics},
                {"details", report}};
    std::ofstream f(path("report.json"), std::ios::binary | std::ios::trunc);
    f << out.dump(2) << "\n";
    f.close();
    record("report.json");
  }

  Json domain_check() const {
    try {
      return num(boundary_max(make_datum(cfg)));
    } catch (const std::exception&) {
      return nullptr;
    }
  }

  void write_manifest() const {
    Json outputs = Json::array();
    for (const auto& o : result.outputs) outputs.push_back({{"path", o.path}, {"sha256", o.sha256}});
    Json options = Json::object();
    if (opts.t_star) options["t_star"] = *opts.t_star;
    Json manifest = {
        {"tool_version", kToolVersion},
        {"timestamp", utc_now()},
        {"command", result.command},
        {"options", options},
        {"config_echo", Json::parse(emit_config(cfg))},
        {"calibration",
         {{"contraction_c", cfg.calibration.contraction_c},
          {"almost_conservation_c", cfg.calibration.almost_conservation_c},
          {"almost_conservation_C_hat", cfg.calibration.c_hat},
          {"provenance", cfg.calibration.provenance}}},
        {"grid", {{"n", cfg.grid.size()}, {"L", cfg.grid.length()}}},
        {"domain",
         {{"approximation", "periodic box [-L/2, L/2) standing in for the real line"},
          {"datum_boundary_max", domain_check()}}},
        {"params",
         {{"gamma", cfg.params.gamma},
          {"gamma1", cfg.params.gamma1},
          {"gamma2", cfg.params.gamma2},
          {"delta1", cfg.params.delta1},
          {"delta2", cfg.params.delta2}}},
        {"passed", result.passed()},
        {"wall_seconds", result.seconds},
        {"outputs", outputs}};
    std::ofstream f(path("manifest.json"), std::ios::binary | std::ios::trunc);
    f << manifest.dump(2) << "\n";
    if (!f) throw std::runtime_error("cannot write manifest in '" + opts.out_dir.string() + "'");
  }
};

EnsembleSpec ensemble_spec(const Config& cfg) {
  const auto& e = cfg.diagnostics.ensemble;
  EnsembleSpec spec;
  spec.grid = SpectralGrid(e.n, e.length);
  spec.seed = cfg.seed;
  spec.count = e.count;
  spec.options = cfg.datum.random;
  if (spec.options.band_modes > e.n / 2) spec.options.band_modes = 0;
  spec.threads = cfg.threads;
  return spec;
}

SpectralField advance(const SpectralField& state, double dt, const Model& model,
                      const SolverConfig& solver) {
  switch (solver.method) {
    case Method::ifrk4: return step_ifrk4(state, dt, model);
    case Method::rk4: return step_rk4(state, dt, model);
    case Method::picard:
      return picard_iterate(state, dt, solver.picard_quadrature_nodes, 100, model.params(), 0.0,
                            false)
          .final_state();
  }
  throw std::logic_error("advance: bad method");
}

double try_radius(const SpectralField& f, double floor = 1e-12, double ceiling = 1e-4) {
  try {
    return estimate_radius(f, floor, ceiling).sigma_est;
  } catch (const InsufficientDataError&) {
    return kNaN;
  }
}

// ---- simulate -------------------------------------------------------------------

void cmd_simulate(Run& run) {
  const Config& cfg = run.cfg;
  const SpectralField eta0 = make_datum(cfg);
  SolverConfig solver = cfg.solver;
  solver.keep_snapshots = true;
  const Trajectory traj = evolve(eta0, solver, cfg.params, cfg.sigma_observe);

  Series s;
  s.columns = {"time", "E"};
  for (double sg : cfg.sigma_observe) s.columns.push_back("E_sigma@" + fmt(sg));
  for (double sg : cfg.sigma_observe) s.columns.push_back("h2_vsigma@" + fmt(sg));
  s.columns.push_back("sigma_est");
  const Model model(eta0.grid(), cfg.params);
  bool equivalence = true;
  double e0 = model.energy(eta0), drift = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double e = model.energy(traj.snapshots[i]);
    drift = std::max(drift, std::abs(e - e0) / std::max(std::abs(e0), 1e-300));
    std::vector<double> row{traj.times[i], e};
    for (const auto& r : traj.reports[i]) row.push_back(r.modified_energy);
    for (const auto& r : traj.reports[i]) {
      row.push_back(r.h2_norm_vsigma);
      equivalence = equivalence && r.equivalence_holds;
    }
    row.push_back(try_radius(traj.snapshots[i]));
    s.add(std::move(row));
  }
  run.series("trajectory.csv", s);
  if (cfg.solver.keep_snapshots) {
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
      char name[48];
      std::snprintf(name, sizeof name, "snapshots/snapshot_%06zu.json", i);
      run.snapshot(name, traj.snapshots[i], traj.times[i]);
    }
  }
  run.metric("records", static_cast<double>(traj.times.size()));
  run.metric("energy_relative_drift", drift);
  run.check("run_completed", traj.status == RunStatus::completed,
            traj.status == RunStatus::completed ? "reached t_end = " + fmt(cfg.solver.t_end)
                                                : traj.message);
  if (cfg.params.conservative_case()) {
    run.check("energy_conserved", drift <= 1e-8,
              "max relative drift of E " + fmt(drift) + " (want <= 1e-8)");
  }
  run.check("energy_equivalence", equivalence,
            "3/4 min(1,g1,d1) |v|^2 <= 2 E_sigma <= max(1,g1,d1) |v|^2 at every record");
  run.report["conservative_case"] = cfg.params.conservative_case();
  const double edge = boundary_max(eta0);
  run.metric("datum_boundary_max", edge);
  // random data are periodic by construction; the surrogate question only
  // arises for localized data
  if (cfg.datum.kind != DatumKind::random) {
    run.check("boundary_decay", edge <= 1e-14,
              "max |eta0| on the outer tenth of the box " + fmt(edge) + " (want <= 1e-14)");
  }
}

// ---- verify-lemmas -------------------------------------------------------------------

void cmd_verify_lemmas(Run& run) {
  const auto& l = run.cfg.diagnostics.lemmas;
  std::vector<RatioReport> reports;
  const auto g2 = linspace(-l.xi_max, l.xi_max, l.p2_points);
  reports.push_back(verify_cosh_product_bound(2, g2));
  const auto g3 = linspace(-l.xi_max, l.xi_max, l.p3_points);
  reports.push_back(verify_cosh_product_bound(3, g3));
  const auto pairs = random_pairs(run.cfg.seed, l.pairs, -l.pair_range, l.pair_range);
  reports.push_back(verify_cosh_difference_bound(pairs));
  // sigma in (0, sigma_max]: the grid starts one step above zero
  const double ds = l.weight_sigma_max / l.weight_sigma_points;
  const auto sg = linspace(ds, l.weight_sigma_max, l.weight_sigma_points);
  const auto xg = linspace(-l.weight_xi_max, l.weight_xi_max, l.weight_xi_points);
  for (auto& r : verify_weight_bounds(sg, xg)) reports.push_back(std::move(r));

  std::vector<std::vector<std::string>> rows;
  Json list = Json::array();
  for (const auto& r : reports) {
    rows.push_back({r.name, fmt(r.max_ratio), r.argmax_input, std::to_string(r.sample_count),
                    std::to_string(r.violations), r.holds() ? "1" : "0"});
    list.push_back(ratio_json(r));
    run.metric(r.name + ".max_ratio", r.max_ratio);
    run.check(r.name, r.holds(),
              "max_ratio " + fmt(r.max_ratio) + ", violations " + std::to_string(r.violations) +
                  " over " + std::to_string(r.sample_count) + " samples");
  }
  run.table("lemmas.csv",
            {"name", "max_ratio", "argmax_input", "sample_count", "violations", "holds"}, rows);
  run.report["reports"] = list;
}

// ---- verify-estimates ----------------------------------------------------------------

void cmd_verify_estimates(Run& run) {
  const Config& cfg = run.cfg;
  const auto& d = cfg.diagnostics;
  const EnsembleSpec spec = ensemble_spec(cfg);
  const auto sigmas = geomspace(d.ensemble.sigma_min, d.ensemble.sigma_max, d.ensemble.sigma_points);

  // nonlinear estimate: amplitude sweep and N -> 2N refinement
  const RatioReport ne = nonlinear_estimate_ratio(spec, sigmas, cfg.params, 1.0);
  double scaled_max = 0.0;
  Series scaling;
  scaling.columns = {"scale", "nonlinear_max_ratio"};
  for (double lambda : {1e-2, 1e-1, 1.0, 1e1, 1e2}) {
    const double r = lambda == 1.0 ? ne.max_ratio
                                   : nonlinear_estimate_ratio(spec, sigmas, cfg.params, lambda).max_ratio;
    scaling.add({lambda, r});
    scaled_max = std::isfinite(r) ? std::max(scaled_max, r) : r;
  }
  EnsembleSpec fine = spec;
  fine.grid = SpectralGrid(2 * spec.grid.size(), spec.grid.length());
  if (fine.options.band_modes == 0) fine.options.band_modes = spec.grid.size() / 4;
  const double refined = nonlinear_estimate_ratio(fine, sigmas, cfg.params, 1.0).max_ratio;
  const double refinement_change = std::abs(refined - ne.max_ratio) / ne.max_ratio;
  run.metric("nonlinear.max_ratio", ne.max_ratio);
  run.metric("nonlinear.max_ratio_scaled", scaled_max);
  run.metric("nonlinear.refinement_change", refinement_change);
  run.check("nonlinear_estimate_finite", ne.violations == 0 && std::isfinite(scaled_max),
            "max ratio " + fmt(ne.max_ratio) + ", " + fmt(scaled_max) +
                " over amplitudes 1e-2 .. 1e2");
  run.check("nonlinear_estimate_refinement", refinement_change < 0.1,
            "N -> 2N changes the max ratio by " + fmt(100.0 * refinement_change) + "%");
  run.series("nonlinear_scaling.csv", scaling);

  // key lemma
  const KeyLemmaReport kl = key_lemma_ratio(spec, sigmas, cfg.params);
  run.metric("key_lemma.max_ratio", kl.total.max_ratio);
  run.metric("key_lemma.worst_sigma_spread", kl.worst_sigma_spread);
  run.metric("key_lemma.min_slope", kl.min_slope);
  run.metric("key_lemma.max_slope", kl.max_slope);
  run.check("key_lemma_finite", kl.total.violations == 0 && std::isfinite(kl.total.max_ratio),
            "max ratio " + fmt(kl.total.max_ratio));
  run.check("key_lemma_sigma_stable", kl.worst_sigma_spread < d.spread_limit,
            "worst per-field variation across sigma x" + fmt(kl.worst_sigma_spread));
  const bool slopes_ok = kl.field_slopes.size() == static_cast<std::size_t>(spec.count) &&
                         std::abs(kl.min_slope - 2.0) <= d.slope_tolerance &&
                         std::abs(kl.max_slope - 2.0) <= d.slope_tolerance;
  run.check("key_lemma_sigma_squared", slopes_ok,
            "per-field slopes in [" + fmt(kl.min_slope) + ", " + fmt(kl.max_slope) + "] over " +
                std::to_string(kl.field_slopes.size()) + " fields");
  const std::pair<const RatioReport*, double> terms[] = {
      {&kl.i1, kl.sup_spread_i1}, {&kl.i2, kl.sup_spread_i2}, {&kl.i3, kl.sup_spread_i3}};
  const double per_field[] = {kl.worst_i1_spread, kl.worst_i2_spread, kl.worst_i3_spread};
  for (std::size_t t = 0; t < 3; ++t) {
    const auto& [r, sup_spread] = terms[t];
    run.metric(r->name + ".max_ratio", r->max_ratio);
    run.metric(r->name + ".constant_spread", sup_spread);
    run.metric(r->name + ".worst_field_spread", per_field[t]);
    run.check(r->name + "_finite_stable",
              r->violations == 0 && std::isfinite(r->max_ratio) && sup_spread < d.spread_limit,
              "max ratio " + fmt(r->max_ratio) + ", ensemble constant varies x" +
                  fmt(sup_spread) + " across sigma (single worst field x" + fmt(per_field[t]) + ")");
  }

  // dE_sigma/dt against the pairing along a trajectory of the datum
  SolverConfig solver = cfg.solver;
  solver.t_end = d.derivative.t_end;
  solver.observer_stride = d.derivative.stride;
  solver.keep_snapshots = true;
  const Trajectory traj = evolve(make_datum(cfg), solver, cfg.params, {});
  if (traj.status != RunStatus::completed) throw std::runtime_error(traj.message);
  const DerivativeCheck dc = energy_derivative_check(traj, d.derivative.sigma, cfg.params);
  run.metric("derivative.residual_fine", dc.residual_fine);
  run.metric("derivative.residual_coarse", dc.residual_coarse);
  run.metric("derivative.reduction", dc.reduction);
  run.metric("derivative.integrated_residual", dc.integrated_residual);
  run.check("energy_derivative_second_order", !dc.resolution_insufficient && dc.reduction > 0.0,
            "residual h=" + fmt(dc.step) + ": " + fmt(dc.residual_fine) + ", 2h: " +
                fmt(dc.residual_coarse) + ", reduction x" + fmt(dc.reduction) + " (want 4 +- 1)");

  // files
  std::vector<std::vector<std::string>> rows;
  for (const RatioReport* r : {&ne, &kl.total, &kl.i1, &kl.i2, &kl.i3}) {
    rows.push_back({r->name, fmt(r->max_ratio), r->argmax_input, std::to_string(r->sample_count),
                    std::to_string(r->violations)});
  }
  run.table("estimates.csv", {"name", "max_ratio", "argmax_input", "sample_count", "violations"},
            rows);
  Series slopes;
  slopes.columns = {"member", "slope"};
  for (std::size_t i = 0; i < kl.field_slopes.size(); ++i) {
    slopes.add({static_cast<double>(i), kl.field_slopes[i]});
  }
  run.series("key_lemma_slopes.csv", slopes);
  Series by_sigma;
  by_sigma.columns = {"sigma", "nonlinear_max_ratio"};
  for (double s : sigmas) {
    std::ostringstream key;
    key << "max_ratio@" << s;
    by_sigma.add({s, ne.parameters.at(key.str())});
  }
  run.series("nonlinear_by_sigma.csv", by_sigma);
  run.report["nonlinear"] = ratio_json(ne);
  run.report["key_lemma"] = {{"total", ratio_json(kl.total)},
                             {"i1", ratio_json(kl.i1)},
                             {"i2", ratio_json(kl.i2)},
                             {"i3", ratio_json(kl.i3)}};
  run.report["derivative"] = {{"sigma", d.derivative.sigma},
                              {"step", dc.step},
                              {"max_pairing", dc.max_pairing},
                              {"max_energy_change", dc.max_energy_change}};
}

// ---- almost-conservation ---------------------------------------------------------------

double almost_conservation_span(const Config& cfg, const SpectralField& eta0) {
  const auto& a = cfg.almost_conservation;
  if (a.t_span > 0.0) return a.t_span;
  const double top = *std::max_element(a.sigmas.begin(), a.sigmas.end());
  return local_timespan(hs_norm(eta0, top, 2.0), cfg.calibration.contraction_c);
}

void cmd_almost_conservation(Run& run) {
  const Config& cfg = run.cfg;
  const auto& a = cfg.almost_conservation;
  const SpectralField eta0 = make_datum(cfg);
  const double span = almost_conservation_span(cfg, eta0);
  SolverConfig solver = cfg.solver;
  solver.observer_stride = 1;
  const AlmostConservationReport rep =
      almost_conservation_experiment(eta0, a.sigmas, span, cfg.params, solver);

  Series s;
  s.columns = {"sigma", "deviation", "initial_energy", "deviation_quarter", "deviation_half",
               "deviation_full", "used_in_fit"};
  for (std::size_t i = 0; i < rep.sigmas.size(); ++i) {
    s.add({rep.sigmas[i], rep.deviations[i], rep.initial_energies[i], rep.span_deviations[i][0],
           rep.span_deviations[i][1], rep.span_deviations[i][2], rep.used_in_fit[i] ? 1.0 : 0.0});
  }
  run.series("almost_conservation.csv", s);
  run.metric("t_span", span);
  run.metric("slope", rep.fit.slope);
  run.metric("r_squared", rep.fit.r_squared);
  run.metric("max_doubling_growth", rep.max_doubling_growth);
  run.metric("almost_conservation_c", rep.almost_conservation_c);
  run.check("sigma_squared_slope", std::abs(rep.fit.slope - a.slope_target) <= a.slope_tolerance,
            "slope " + fmt(rep.fit.slope) + " (want " + fmt(a.slope_target) + " +- " +
                fmt(a.slope_tolerance) + ")");
  run.check("fit_quality", rep.fit.r_squared >= a.min_r_squared,
            "r^2 " + fmt(rep.fit.r_squared) + " (want >= " + fmt(a.min_r_squared) + ")");
  run.check("linear_in_time", rep.max_doubling_growth <= a.max_doubling_growth,
            "max D(2t)/D(t) " + fmt(rep.max_doubling_growth) + " over t_span/4 .. t_span (want <= " +
                fmt(a.max_doubling_growth) + ")");
  run.report["fit"] = fit_json(rep.fit);
  run.report["t_span"] = span;
}

// ---- radius-track --------------------------------------------------------------------

void cmd_radius_track(Run& run) {
  const Config& cfg = run.cfg;
  const auto& rc = cfg.radius;
  const SpectralField eta0 = make_datum(cfg);
  const Model model(eta0.grid(), cfg.params);

  const long total_steps = std::lround(rc.t_end / rc.dt);
  if (total_steps < 100) throw ConfigError("radius: t_end / dt must be >= 100");
  // geometric sample times, snapped to whole steps
  std::vector<long> sample_steps{0};
  for (double t : geomspace(rc.t_end / 100.0, rc.t_end, rc.samples)) {
    const long n = std::clamp(std::lround(t / rc.dt), 1L, total_steps);
    if (n != sample_steps.back()) sample_steps.push_back(n);
  }

  Series s;
  s.columns = {"time", "sigma_est", "sigma_est_sqrt_t", "power_exponent", "curvature",
               "exponential_tail", "modes_used", "E_sigma0"};
  std::vector<double> times, estimates;
  bool all_estimated = true, all_exponential = true;
  SpectralField state = eta0;
  long step = 0;
  for (long target : sample_steps) {
    for (; step < target; ++step) {
      state = advance(state, rc.dt, model, cfg.solver);
      if (!state.is_finite()) throw std::runtime_error("radius-track: state became non-finite");
    }
    const double t = static_cast<double>(step) * rc.dt;
    const double es = model.energy_report(state, rc.sigma0, t).modified_energy;
    try {
      const RadiusEstimate r = estimate_radius(state, rc.floor, rc.ceiling);
      s.add({t, r.sigma_est, r.sigma_est * std::sqrt(t), r.power_exponent, r.curvature,
             r.exponential_tail ? 1.0 : 0.0, static_cast<double>(r.modes_used), es});
      all_exponential = all_exponential && r.exponential_tail;
      if (t > 0.0) {
        times.push_back(t);
        estimates.push_back(r.sigma_est);
      }
    } catch (const InsufficientDataError& e) {
      all_estimated = false;
      run.log(std::string("t = ") + fmt(t) + ": " + e.what());
      s.add({t, kNaN, kNaN, kNaN, kNaN, 0.0, 0.0, es});
    }
  }
  run.series("radius.csv", s);
  run.check("radius_estimated", all_estimated, "estimator succeeded at every sample time");
  if (times.size() >= 5) {
    const DecayReport dr = decay_fit(times, estimates);
    run.metric("alpha", dr.alpha);
    run.metric("min_sigma_sqrt_t", dr.min_sigma_sqrt_t);
    run.metric("sigma_est_initial", s.rows.front()[1]);
    run.metric("sigma_est_final", s.rows.back()[1]);
    run.check("radius_lower_bound", dr.lower_bound_holds && all_estimated,
              "min_t sigma_est sqrt(t) = " + fmt(dr.min_sigma_sqrt_t) + " over (0, " +
                  fmt(rc.t_end) + "], fitted alpha " + fmt(dr.alpha));
    run.report["decay_fit"] = fit_json(dr.fit);
  } else {
    run.check("radius_lower_bound", false, "fewer than 5 usable samples");
  }
  run.metric("exponential_tail_everywhere", all_exponential ? 1.0 : 0.0);
}

// ---- continuation --------------------------------------------------------------------

void cmd_continuation(Run& run) {
  const Config& cfg = run.cfg;
  const auto& cc = cfg.continuation;
  const double t_star = run.opts.t_star.value_or(cc.t_star);
  if (!(t_star > 0.0)) throw UsageError("--t-star must be > 0");
  SolverConfig solver = cfg.solver;
  solver.dt = cc.dt;
  solver.contraction_constant_c = cfg.calibration.contraction_c;
  solver.observer_stride = std::max(1, static_cast<int>(std::lround(0.1 / cc.dt)));
  const ContinuationReport rep = continuation_run(make_datum(cfg), cc.sigma0, t_star, cfg.params,
                                                  cc.safety, cfg.calibration.c_hat, solver);
  Series energy;
  energy.columns = {"time", "E_sigma"};
  for (std::size_t i = 0; i < rep.times.size(); ++i) energy.add({rep.times[i], rep.modified_energy[i]});
  run.series("continuation.csv", energy);
  Series intervals;
  intervals.columns = {"start", "length", "sup_E_sigma"};
  for (const auto& iv : rep.intervals) intervals.add({iv.start, iv.length, iv.sup_modified_energy});
  run.series("intervals.csv", intervals);

  run.metric("t_star", t_star);
  run.metric("sigma", rep.sigma);
  run.metric("c_hat", rep.c_hat);
  run.metric("E_sigma0_initial", rep.initial_energy_sigma0);
  run.metric("sup_E_sigma", rep.sup_modified_energy);
  run.metric("intervals", static_cast<double>(rep.intervals.size()));
  run.check("energy_bound", rep.bound_holds,
            "sup_t E_sigma = " + fmt(rep.sup_modified_energy) + " vs 2 E_sigma0(0) = " +
                fmt(2.0 * rep.initial_energy_sigma0) + " with sigma = " + fmt(rep.sigma) +
                (rep.clamped ? " (clamped to sigma0)" : "") + " over [0, " + fmt(t_star) + "]");
  run.report["clamped"] = rep.clamped;
  run.report["completed"] = rep.status == RunStatus::completed;
}

// ---- picard --------------------------------------------------------------------------

struct PicardMember {
  double t_span = 0.0, norm = 0.0, max_ratio = 0.0, agreement = 0.0;
  int sweeps = 0;
  bool converged = false, diverged = false;
};

std::vector<PicardMember> picard_ensemble(const Config& cfg, double c, bool compare) {
  const EnsembleSpec spec = ensemble_spec(cfg);
  const auto members = random_ensemble(spec.grid, spec.seed, spec.count, spec.options);
  const Model model(spec.grid, cfg.params);
  const auto& pc = cfg.picard;
  std::vector<PicardMember> out(members.size());
  parallel_for(static_cast<int>(members.size()), cfg.threads, [&](int i) {
    const auto& eta = members[static_cast<std::size_t>(i)];
    PicardMember& m = out[static_cast<std::size_t>(i)];
    m.norm = hs_norm(eta, pc.sigma, 2.0);
    m.t_span = local_timespan(m.norm, c);
    const PicardResult pr = picard_iterate(eta, m.t_span, cfg.solver.picard_quadrature_nodes,
                                           pc.iterations, cfg.params, pc.sigma, false);
    for (double r : pr.ratios) m.max_ratio = std::max(m.max_ratio, r);
    if (pr.diverged) m.max_ratio = std::numeric_limits<double>::infinity();
    m.sweeps = static_cast<int>(pr.differences.size());
    m.converged = pr.converged;
    m.diverged = pr.diverged;
    if (compare) {
      SpectralField ref = eta;
      const double dt = m.t_span / pc.reference_steps;
      for (int s = 0; s < pc.reference_steps; ++s) ref = step_ifrk4(ref, dt, model);
      m.agreement = hs_norm(pr.final_state() - ref, pc.sigma, 2.0);
    }
  });
  return out;
}

double worst_ratio(const std::vector<PicardMember>& members) {
  double worst = 0.0;
  for (const auto& m : members) worst = std::max(worst, m.max_ratio);
  return worst;
}

void cmd_picard(Run& run) {
  const Config& cfg = run.cfg;
  const auto& pc = cfg.picard;
  const auto members = picard_ensemble(cfg, cfg.calibration.contraction_c, true);
  Series s;
  s.columns = {"member", "norm", "t_span", "sweeps", "max_ratio", "converged", "agreement"};
  double worst = 0.0, worst_agreement = 0.0;
  bool all_converged = true;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    s.add({static_cast<double>(i), m.norm, m.t_span, static_cast<double>(m.sweeps), m.max_ratio,
           m.converged ? 1.0 : 0.0, m.agreement});
    worst = std::max(worst, m.max_ratio);
    worst_agreement = std::max(worst_agreement, m.agreement);
    all_converged = all_converged && m.converged;
  }
  run.series("picard.csv", s);
  run.metric("contraction_c", cfg.calibration.contraction_c);
  run.metric("max_ratio", worst);
  run.metric("max_agreement", worst_agreement);
  run.check("contraction", worst <= pc.ratio_limit && all_converged,
            "max Picard ratio " + fmt(worst) + " (want <= " + fmt(pc.ratio_limit) + ") with c = " +
                fmt(cfg.calibration.contraction_c) + ", " +
                (all_converged ? "all converged" : "not all converged"));
  run.check("matches_ifrk4", worst_agreement <= pc.agreement_tolerance,
            "max |picard - ifrk4| in H^{sigma,2} " + fmt(worst_agreement) + " (want <= " +
                fmt(pc.agreement_tolerance) + ")");
}

// ---- calibrate -----------------------------------------------------------------------

void cmd_calibrate(Run& run) {
  const Config& cfg = run.cfg;
  const auto& cal = cfg.calibrate;
  const auto ratio_at = [&](double c) { return worst_ratio(picard_ensemble(cfg, c, false)); };

  // Larger c means shorter spans and smaller ratios. Bracket, then bisect in log c.
  double hi = 1.0;
  while (!(ratio_at(hi) <= cal.ratio_target)) {
    hi *= 4.0;
    if (hi > 1e6) throw std::runtime_error("calibrate: no admissible contraction constant");
  }
  double lo = hi / 4.0;
  while (ratio_at(lo) <= cal.ratio_target) {
    hi = lo;
    lo /= 4.0;
    if (lo < 1e-8) throw std::runtime_error("calibrate: contraction constant unbounded below");
  }
  for (int i = 0; i < cal.bisection_steps; ++i) {
    const double mid = std::sqrt(lo * hi);
    (ratio_at(mid) <= cal.ratio_target ? hi : lo) = mid;
    if (hi / lo < 1.0 + 1e-3) break;
  }
  // smallest c (longest span) whose ratios stay within the target
  const double contraction_c = hi;
  run.log("contraction c " + fmt(contraction_c) + " (ratio above target at " + fmt(lo) + ")");

  Config with_c = cfg;
  with_c.calibration.contraction_c = contraction_c;
  const SpectralField eta0 = make_datum(cfg);
  const double span = almost_conservation_span(with_c, eta0);
  SolverConfig solver = cfg.solver;
  solver.observer_stride = 1;
  const AlmostConservationReport ac = almost_conservation_experiment(
      eta0, cfg.almost_conservation.sigmas, span, cfg.params, solver);
  const double c_ac = ac.almost_conservation_c;
  const Model model(eta0.grid(), cfg.params);
  const double e0 = model.energy_report(eta0, cfg.continuation.sigma0).modified_energy;
  const double c_hat = continuation_constant(c_ac, e0);

  std::ostringstream prov;
  prov << "calibrate: seed " << cfg.seed << ", ensemble " << cfg.diagnostics.ensemble.count
       << " fields on N=" << cfg.diagnostics.ensemble.n << ", datum "
       << to_string(cfg.datum.kind) << " on N=" << cfg.grid.size() << " L=" << fmt(cfg.grid.length());
  Json file = {{"calibration",
                {{"contraction_c", contraction_c},
                 {"almost_conservation_c", c_ac},
                 {"c_hat", c_hat},
                 {"provenance", prov.str()}}},
               {"evidence",
                {{"inadmissible_c_below", lo},
                 {"ratio_target", cal.ratio_target},
                 {"ratio_at_frozen_c", ratio_at(contraction_c)},
                 {"almost_conservation_t_span", span},
                 {"almost_conservation_slope", ac.fit.slope},
                 {"E_sigma0_initial", e0},
                 {"sigma0", cfg.continuation.sigma0}}}};
  {
    std::ofstream f(run.path("calibration.json"), std::ios::binary | std::ios::trunc);
    f << file.dump(2) << "\n";
  }
  run.record("calibration.json");
  run.metric("contraction_c", contraction_c);
  run.metric("almost_conservation_c", c_ac);
  run.metric("c_hat", c_hat);
  run.check("calibrated", std::isfinite(c_hat) && c_hat > 0.0,
            "c = " + fmt(contraction_c) + ", c_ac = " + fmt(c_ac) + ", C_hat = " + fmt(c_hat));
}

}  // namespace

bool CommandResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

double CommandResult::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  throw std::out_of_range("no metric '" + name + "' in " + command);
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{
      "simulate", "verify-lemmas", "verify-estimates", "almost-conservation",
      "radius-track", "continuation", "picard", "calibrate"};
  return names;
}

SpectralField make_datum(const Config& config) {
  const auto& d = config.datum;
  switch (d.kind) {
    case DatumKind::pulse: return pulse_datum(config.grid, config.seed, d.pulse);
    case DatumKind::random: return random_analytic_field(config.grid, config.seed, d.random);
    case DatumKind::snapshot: {
      Snapshot snap = read_snapshot(d.path);
      if (!(snap.field.grid() == config.grid)) {
        throw GridMismatchError("datum snapshot '" + d.path + "' is on a different grid than grid.n/grid.L");
      }
      return std::move(snap.field);
    }
  }
  throw std::logic_error("make_datum: bad kind");
}

CommandResult run_command(const std::string& command, const Config& config,
                          const RunOptions& options) {
  using Handler = void (*)(Run&);
  static const std::vector<std::pair<std::string, Handler>> handlers{
      {"simulate", cmd_simulate},
      {"verify-lemmas", cmd_verify_lemmas},
      {"verify-estimates", cmd_verify_estimates},
      {"almost-conservation", cmd_almost_conservation},
      {"radius-track", cmd_radius_track},
      {"continuation", cmd_continuation},
      {"picard", cmd_picard},
      {"calibrate", cmd_calibrate}};
  const auto it = std::find_if(handlers.begin(), handlers.end(),
                               [&](const auto& h) { return h.first == command; });
  if (it == handlers.end()) throw UsageError("unknown command '" + command + "'");

  const auto start = std::chrono::steady_clock::now();
  Run run(command, config, options);
  it->second(run);
  run.finish_report();
  run.result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  run.write_manifest();
  return run.result;
}

ReplayResult replay_manifest(const fs::path& manifest, const fs::path& out_dir, bool quiet) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open manifest '" + manifest.string() + "'");
  Json m;
  try {
    m = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("manifest '" + manifest.string() + "' is malformed: " + e.what());
  }
  const Config cfg = parse_config_text(m.at("config_echo").dump());
  RunOptions opts;
  opts.out_dir = out_dir;
  opts.quiet = quiet;
  if (m.contains("options") && m["options"].contains("t_star")) {
    opts.t_star = m["options"]["t_star"].get<double>();
  }
  ReplayResult result{run_command(m.at("command").get<std::string>(), cfg, opts), {}};
  for (const auto& o : m.at("outputs")) {
    const auto path = o.at("path").get<std::string>();
    const auto expected = o.at("sha256").get<std::string>();
    const auto found = std::find_if(result.rerun.outputs.begin(), result.rerun.outputs.end(),
                                    [&](const OutputFile& f) { return f.path == path; });
    if (found == result.rerun.outputs.end() || found->sha256 != expected) {
      result.mismatches.push_back(path);
    }
  }
  if (result.rerun.outputs.size() != m.at("outputs").size()) {
    result.mismatches.push_back("<output count differs>");
  }
  return result;
}

}  // namespace kdvbbm

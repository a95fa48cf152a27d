#include "kdvbbm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kdvbbm/spectral.hpp"

namespace kdvbbm {

namespace {

constexpr double kBlowUpFactor = 1e10;

const Complex kI(0.0, 1.0);

// c_k <- exp(-i phi_k t) c_k
SpectralField propagate(const SpectralField& f, std::span<const double> phi, double t) {
  SpectralField out(f.grid());
  for (int i = 0; i < f.size(); ++i) {
    out[i] = std::polar(1.0, -phi[static_cast<std::size_t>(i)] * t) * f[i];
  }
  return out;
}

// Nonlinear part of the right-hand side, -i F(eta).
SpectralField nonlinear_rate(const Model& model, const SpectralField& eta) {
  SpectralField f = model.nonlinearity(eta);
  f *= -kI;
  return f;
}

double sup_norm_difference(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b,
                           double sigma) {
  double worst = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, hs_norm(a[j] - b[j], sigma, 2.0));
  return worst;
}

double sup_norm(const std::vector<SpectralField>& a, double sigma) {
  double worst = 0.0;
  for (const auto& f : a) worst = std::max(worst, hs_norm(f, sigma, 2.0));
  return worst;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::ifrk4: return "ifrk4";
    case Method::rk4: return "rk4";
    case Method::picard: return "picard";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "ifrk4") return Method::ifrk4;
  if (name == "rk4") return Method::rk4;
  if (name == "picard") return Method::picard;
  throw std::invalid_argument("unknown method '" + name + "' (expected ifrk4, rk4 or picard)");
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("solver.dt must be > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("solver.t_end must be >= 0");
  }
  if (picard_quadrature_nodes < 8) {
    throw std::invalid_argument("solver.picard_nodes must be >= 8");
  }
  if (!(contraction_constant_c > 0.0)) {
    throw std::invalid_argument("solver.contraction_c must be > 0");
  }
  if (observer_stride < 1) throw std::invalid_argument("solver.observer_stride must be >= 1");
}

double local_timespan(double data_norm, double c) {
  if (!(data_norm >= 0.0)) throw std::invalid_argument("local_timespan: data_norm must be >= 0");
  if (!(c > 0.0)) throw std::invalid_argument("local_timespan: c must be > 0");
  const double r = 0.5 * data_norm;
  return 1.0 / (2.0 * c * (1.0 + r) * (1.0 + r));
}

SpectralField rhs(const SpectralField& eta, const ModelParams& p) {
  return Model(eta.grid(), p).rhs(eta);
}

SpectralField step_ifrk4(const SpectralField& state, double dt, const Model& model) {
  const auto phi = model.phi_table();
  const SpectralField k1 = nonlinear_rate(model, state);
  const SpectralField half = propagate(state, phi, 0.5 * dt);

  SpectralField stage = state;
  for (int i = 0; i < state.size(); ++i) stage[i] += 0.5 * dt * k1[i];
  const SpectralField k2 = nonlinear_rate(model, propagate(stage, phi, 0.5 * dt));

  stage = half;
  for (int i = 0; i < state.size(); ++i) stage[i] += 0.5 * dt * k2[i];
  const SpectralField k3 = nonlinear_rate(model, stage);

  stage = propagate(state, phi, dt) + propagate(dt * k3, phi, 0.5 * dt);
  const SpectralField k4 = nonlinear_rate(model, stage);

  // E^2 y + dt/6 (E^2 k1 + 2 E (k2 + k3) + k4), E = exp(-i phi dt/2)
  SpectralField out = propagate(state + (dt / 6.0) * k1, phi, dt);
  out += propagate((dt / 3.0) * (k2 + k3), phi, 0.5 * dt);
  for (int i = 0; i < state.size(); ++i) out[i] += dt / 6.0 * k4[i];
  return out;
}

SpectralField step_ifrk4(const SpectralField& state, double dt, const ModelParams& p) {
  return step_ifrk4(state, dt, Model(state.grid(), p));
}

SpectralField step_rk4(const SpectralField& state, double dt, const Model& model) {
  const SpectralField k1 = model.rhs(state);
  const SpectralField k2 = model.rhs(state + (0.5 * dt) * k1);
  const SpectralField k3 = model.rhs(state + (0.5 * dt) * k2);
  const SpectralField k4 = model.rhs(state + dt * k3);
  SpectralField out = state;
  for (int i = 0; i < state.size(); ++i) {
    out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return out;
}

PicardResult picard_iterate(const SpectralField& eta0, double t_span, int n_nodes, int n_iters,
                            const ModelParams& p, double sigma, bool keep_iterates) {
  if (n_nodes < 8) throw std::invalid_argument("picard_iterate: n_nodes must be >= 8");
  if (!(t_span > 0.0)) throw std::invalid_argument("picard_iterate: t_span must be > 0");
  if (n_iters < 1) throw std::invalid_argument("picard_iterate: n_iters must be >= 1");
  const Model model(eta0.grid(), p);
  const auto phi = model.phi_table();
  const double h = t_span / (n_nodes - 1);

  PicardResult result;
  for (int j = 0; j < n_nodes; ++j) result.node_times.push_back(j * h);

  std::vector<SpectralField> current;
  current.reserve(static_cast<std::size_t>(n_nodes));
  for (double t : result.node_times) current.push_back(propagate(eta0, phi, t));
  const double scale = sup_norm(current, sigma);
  result.iterates.push_back(current);
  if (scale == 0.0) {
    result.converged = true;
    return result;
  }

  int above_one = 0;
  for (int k = 0; k < n_iters; ++k) {
    // g_j = e^{i t_j phi} F(eta(t_j)); Q_j = int_0^{t_j} g.
    std::vector<SpectralField> g;
    g.reserve(current.size());
    for (int j = 0; j < n_nodes; ++j) {
      g.push_back(propagate(model.nonlinearity(current[static_cast<std::size_t>(j)]), phi,
                            -result.node_times[static_cast<std::size_t>(j)]));
    }
    const auto at = [&](int j) -> const SpectralField& { return g[static_cast<std::size_t>(j)]; };
    std::vector<SpectralField> q(static_cast<std::size_t>(n_nodes), SpectralField(eta0.grid()));
    // First interval: quadratic through nodes 0, 1, 2.
    q[1] = (h / 12.0) * (5.0 * at(0) + 8.0 * at(1) - at(2));
    for (int j = 2; j < n_nodes; ++j) {
      if (j % 2 == 0) {
        q[static_cast<std::size_t>(j)] =
            q[static_cast<std::size_t>(j - 2)] + (h / 3.0) * (at(j - 2) + 4.0 * at(j - 1) + at(j));
      } else {
        q[static_cast<std::size_t>(j)] =
            q[static_cast<std::size_t>(j - 1)] + (h / 12.0) * (-1.0 * at(j - 2) + 8.0 * at(j - 1) + 5.0 * at(j));
      }
    }
    std::vector<SpectralField> next;
    next.reserve(current.size());
    for (int j = 0; j < n_nodes; ++j) {
      next.push_back(propagate(eta0 - kI * q[static_cast<std::size_t>(j)], phi,
                               result.node_times[static_cast<std::size_t>(j)]));
    }

    const double d = sup_norm_difference(next, current, sigma);
    if (!result.differences.empty()) {
      const double prev = result.differences.back();
      // Ratios of differences already at rounding level carry no information.
      if (prev > 1e-10 * scale) {
        const double ratio = d / prev;
        result.ratios.push_back(ratio);
        above_one = ratio > 1.0 ? above_one + 1 : 0;
      }
    }
    result.differences.push_back(d);
    current = std::move(next);
    if (keep_iterates) {
      result.iterates.push_back(current);
    } else {
      result.iterates.back() = current;
    }
    if (above_one >= 3 || !std::isfinite(d)) {
      result.diverged = true;
      break;
    }
    if (d <= 1e-13 * scale) {
      result.converged = true;
      break;
    }
  }
  return result;
}

Trajectory evolve(const SpectralField& eta0, const SolverConfig& config, const ModelParams& p,
                  const std::vector<double>& sigma_observe) {
  config.validate();
  const Model model(eta0.grid(), p);
  Trajectory traj;

  const auto record = [&](double t, const SpectralField& state) {
    traj.times.push_back(t);
    if (config.keep_snapshots) traj.snapshots.push_back(state);
    std::vector<EnergyReport> reports;
    reports.reserve(sigma_observe.size());
    for (double s : sigma_observe) reports.push_back(model.energy_report(state, s, t));
    traj.reports.push_back(std::move(reports));
  };

  SpectralField state = eta0;
  record(0.0, state);
  if (config.t_end == 0.0) return traj;

  const double initial = std::max(hs_norm(eta0, 0.0, 2.0), 1e-300);
  const auto steps = static_cast<long>(std::ceil(config.t_end / config.dt - 1e-9));
  double t = 0.0;
  for (long n = 1; n <= steps; ++n) {
    const double dt = (n == steps) ? config.t_end - t : config.dt;
    switch (config.method) {
      case Method::ifrk4: state = step_ifrk4(state, dt, model); break;
      case Method::rk4: state = step_rk4(state, dt, model); break;
      case Method::picard:
        state = picard_iterate(state, dt, config.picard_quadrature_nodes, 100, p, 0.0, false)
                    .final_state();
        break;
    }
    t = (n == steps) ? config.t_end : n * config.dt;
    if (!state.is_finite() || hs_norm(state, 0.0, 2.0) > kBlowUpFactor * initial) {
      traj.status = RunStatus::blow_up;
      traj.message = "blow-up detected at t = " + std::to_string(t);
      return traj;
    }
    if (n % config.observer_stride == 0 || n == steps) record(t, state);
  }
  return traj;
}

double continuation_sigma(double sigma0, double t_star, double c_hat, double safety) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("continuation: sigma0 must be > 0");
  if (!(t_star > 0.0)) throw std::invalid_argument("continuation: t_star must be > 0");
  if (!(safety > 0.0 && safety <= 1.0)) {
    throw std::invalid_argument("continuation: safety must lie in (0, 1]");
  }
  if (!(c_hat > 0.0)) throw std::invalid_argument("continuation: C_hat must be > 0");
  return std::min(sigma0, safety * c_hat / std::sqrt(t_star));
}

double continuation_constant(double almost_conservation_c, double initial_energy) {
  if (!(almost_conservation_c > 0.0) || !(initial_energy > 0.0)) {
    throw std::invalid_argument("continuation_constant: inputs must be > 0");
  }
  const double root = std::sqrt(2.0 * initial_energy);
  return 1.0 / std::sqrt(almost_conservation_c * (1.0 + root) * root);
}

ContinuationReport continuation_run(const SpectralField& eta0, double sigma0, double t_star,
                                    const ModelParams& p, double safety, double c_hat,
                                    const SolverConfig& config) {
  ContinuationReport rep;
  rep.sigma0 = sigma0;
  rep.t_star = t_star;
  rep.c_hat = c_hat;
  rep.safety = safety;
  rep.sigma = continuation_sigma(sigma0, t_star, c_hat, safety);
  rep.clamped = rep.sigma == sigma0;

  const Model model(eta0.grid(), p);
  rep.initial_energy_sigma0 = model.energy_report(eta0, sigma0).modified_energy;

  SolverConfig local = config;
  local.keep_snapshots = true;
  SpectralField state = eta0;
  double start = 0.0;
  rep.times.push_back(0.0);
  rep.modified_energy.push_back(model.energy_report(eta0, rep.sigma).modified_energy);
  rep.sup_modified_energy = rep.modified_energy.back();
  while (start < t_star * (1.0 - 1e-12)) {
    const double span = local_timespan(hs_norm(state, rep.sigma, 2.0),
                                       config.contraction_constant_c);
    local.t_end = std::min(span, t_star - start);
    const Trajectory piece = evolve(state, local, p, {rep.sigma});
    ContinuationInterval interval{start, local.t_end, 0.0};
    for (std::size_t i = 1; i < piece.times.size(); ++i) {
      const double e = piece.reports[i][0].modified_energy;
      rep.times.push_back(start + piece.times[i]);
      rep.modified_energy.push_back(e);
      interval.sup_modified_energy = std::max(interval.sup_modified_energy, e);
    }
    rep.sup_modified_energy = std::max(rep.sup_modified_energy, interval.sup_modified_energy);
    rep.intervals.push_back(interval);
    if (piece.status != RunStatus::completed) {
      rep.status = piece.status;
      break;
    }
    state = piece.snapshots.back();
    start += local.t_end;
  }
  rep.bound_holds = rep.status == RunStatus::completed &&
                    rep.sup_modified_energy <= 2.0 * rep.initial_energy_sigma0;
  return rep;
}

}  // namespace kdvbbm

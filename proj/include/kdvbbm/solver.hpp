#pragma once

#include <string>
#include <vector>

#include "kdvbbm/field.hpp"
#include "kdvbbm/model.hpp"

namespace kdvbbm {

enum class Method { ifrk4, rk4, picard };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Method method = Method::ifrk4;
  int picard_quadrature_nodes = 129;
  double contraction_constant_c = 1.0;
  int observer_stride = 100;
  bool keep_snapshots = true;

  void validate() const;
};

enum class RunStatus { completed, blow_up };

/// Recorded states of one evolution. reports[i] holds one EnergyReport per
/// observed sigma at times[i].
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> snapshots;
  std::vector<std::vector<EnergyReport>> reports;
  RunStatus status = RunStatus::completed;
  std::string message;
};

/// 1 / (2 c (1 + r)^2) with r = data_norm / 2.
double local_timespan(double data_norm, double c);

SpectralField rhs(const SpectralField& eta, const ModelParams& p);

/// One Lawson (integrating-factor) RK4 step; the linear part exp(-i phi dt)
/// is exact.
SpectralField step_ifrk4(const SpectralField& state, double dt, const Model& model);
SpectralField step_ifrk4(const SpectralField& state, double dt, const ModelParams& p);
/// Classical RK4 on the full right-hand side.
SpectralField step_rk4(const SpectralField& state, double dt, const Model& model);

struct PicardResult {
  std::vector<double> node_times;
  std::vector<std::vector<SpectralField>> iterates;  // iterates[k][j] at node_times[j]
  std::vector<double> differences;  // sup_t ||eta^(k+1) - eta^(k)||_{H^{sigma,2}}
  std::vector<double> ratios;       // differences[k] / differences[k-1]
  bool converged = false;
  bool diverged = false;

  const SpectralField& final_state() const { return iterates.back().back(); }
};

/// Fixed-point iteration of the Duhamel map
///   G(eta)(t) = e^{-it phi(D)} eta0 - i int_0^t e^{-i(t-s) phi(D)} F(eta(s)) ds
/// on n_nodes uniform nodes of [0, t_span], with composite Simpson quadrature.
/// Stops after n_iters sweeps, at convergence, or after three consecutive
/// ratios above 1 (diverged).
PicardResult picard_iterate(const SpectralField& eta0, double t_span, int n_nodes, int n_iters,
                            const ModelParams& p, double sigma = 0.0,
                            bool keep_iterates = true);

/// Steps eta0 to config.t_end. Every observer_stride steps (and at the end)
/// records the time, the state (if kept) and an EnergyReport per observed
/// sigma. Deterministic for fixed inputs. On blow-up (non-finite state or
/// H^2 growth by 1e10) returns the partial trajectory with status blow_up.
Trajectory evolve(const SpectralField& eta0, const SolverConfig& config, const ModelParams& p,
                  const std::vector<double>& sigma_observe);

/// Strip width used for a run of length t_star: min(sigma0, safety C / sqrt(t_star)).
double continuation_sigma(double sigma0, double t_star, double c_hat, double safety);

/// C with sigma >= C / sqrt(T*): 1 / sqrt(c (1 + sqrt(2 E0)) sqrt(2 E0)),
/// c the almost-conservation constant and E0 = E_{sigma0}(0).
double continuation_constant(double almost_conservation_c, double initial_energy);

struct ContinuationInterval {
  double start = 0.0;
  double length = 0.0;
  double sup_modified_energy = 0.0;
};

struct ContinuationReport {
  double sigma0 = 0.0;
  double sigma = 0.0;
  double t_star = 0.0;
  double c_hat = 0.0;
  double safety = 0.0;
  bool clamped = false;  // sigma == sigma0
  double initial_energy_sigma0 = 0.0;  // E_{sigma0}(0)
  double sup_modified_energy = 0.0;    // sup_t E_sigma(t)
  bool bound_holds = false;            // sup_t E_sigma(t) <= 2 E_{sigma0}(0)
  std::vector<ContinuationInterval> intervals;
  RunStatus status = RunStatus::completed;
  std::vector<double> times;
  std::vector<double> modified_energy;
};

/// Covers [0, t_star] by successive local intervals of length
/// local_timespan(||eta(start)||_{H^{sigma,2}}, c), tracking E_sigma.
/// Failure of the 2 E bound is reported in the result, not thrown.
ContinuationReport continuation_run(const SpectralField& eta0, double sigma0, double t_star,
                                    const ModelParams& p, double safety, double c_hat,
                                    const SolverConfig& config);

}  // namespace kdvbbm

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kdvbbm/ensemble.hpp"
#include "kdvbbm/fit.hpp"
#include "kdvbbm/model.hpp"
#include "kdvbbm/solver.hpp"

namespace kdvbbm {

/// Worst observed LHS/RHS of an inequality over a sample set.
struct RatioReport {
  std::string name;
  double max_ratio = 0.0;
  std::string argmax_input;
  long sample_count = 0;
  // Samples with ratio > 1, or RHS = 0 while LHS != 0.
  long violations = 0;
  std::map<std::string, double> parameters;

  bool holds() const { return violations == 0 && max_ratio <= 1.0; }
};

std::vector<double> linspace(double lo, double hi, int count);
std::vector<double> geomspace(double lo, double hi, int count);

// ---- brute-force checks of the weight inequalities --------------------------

/// |1 - cosh|xi| prod_j sech|xi_j|| <= 2^p sum_{j != k} |xi_j||xi_k| with
/// xi = sum_j xi_j and the sum over ordered pairs, for every p-tuple drawn
/// from xi_grid. p must be 2 or 3.
RatioReport verify_cosh_product_bound(int p, std::span<const double> xi_grid);

/// |cosh b - cosh a| <= 1/2 |b^2 - a^2| (cosh b + cosh a).
RatioReport verify_cosh_difference_bound(std::span<const std::pair<double, double>> ab);
std::vector<std::pair<double, double>> random_pairs(std::uint64_t seed, long count, double lo,
                                                    double hi);

/// Four pointwise families over sigma_grid x xi_grid:
///   1/2 exp(s|xi|) <= cosh(s|xi|),  cosh(s|xi|) <= exp(s|xi|),
///   (1 - exp(-s|xi|)) / |xi| <= s,  (1 - sech(s|xi|)) / xi^2 <= s^2.
std::vector<RatioReport> verify_weight_bounds(std::span<const double> sigma_grid,
                                              std::span<const double> xi_grid);

// ---- ensemble ratio diagnostics ----------------------------------------------

struct EnsembleSpec {
  SpectralGrid grid{64, 32.0};
  std::uint64_t seed = 20240601;
  int count = 200;
  EnsembleOptions options{};
  int threads = 1;
};

struct KeyLemmaReport {
  RatioReport total;  // |int v N(v)| / (s^2 (1 + |v|) |v|^3)
  RatioReport i1;     // |I1| / (s^2 |v|^3)
  RatioReport i2;     // |I2| / (s^2 |v|^3)
  RatioReport i3;     // |I3| / (s^2 |v|^4)
  std::vector<double> field_slopes;  // d log|total| / d log s, per member
  double min_slope = 0.0;
  double max_slope = 0.0;
  // max over members of max_s ratio / min_s ratio
  double worst_sigma_spread = 0.0;
  // per-term counterparts of worst_sigma_spread
  double worst_i1_spread = 0.0;
  double worst_i2_spread = 0.0;
  double worst_i3_spread = 0.0;
  // max_s / min_s of the ensemble-sup ratio, i.e. of the measured constant
  double sup_spread_total = 0.0;
  double sup_spread_i1 = 0.0;
  double sup_spread_i2 = 0.0;
  double sup_spread_i3 = 0.0;
};

/// Norms are H^2 norms of v; ensemble members are taken as v itself.
KeyLemmaReport key_lemma_ratio(const EnsembleSpec& ensemble, std::span<const double> sigma_grid,
                               const ModelParams& p);

/// max ||F(eta)||_{H^{s,2}} / ((1 + ||eta||_{H^{s,2}}) ||eta||_{H^{s,2}}^2).
/// parameters["max_ratio@<sigma>"] holds the per-sigma maxima.
RatioReport nonlinear_estimate_ratio(const EnsembleSpec& ensemble,
                                     std::span<const double> sigma_grid, const ModelParams& p,
                                     double scale = 1.0);

struct DerivativeCheck {
  RatioReport report;
  double step = 0.0;              // spacing h of the recorded snapshots
  double residual_fine = 0.0;     // max |central difference (h) - pairing|
  double residual_coarse = 0.0;   // same with spacing 2h
  double reduction = 0.0;         // coarse / fine, ~4 for a second-order difference
  bool resolution_insufficient = false;
  double max_pairing = 0.0;
  // max_t |E(t) - E(0) - int_0^t pairing| with Simpson's rule, even nodes
  double integrated_residual = 0.0;
  double max_energy_change = 0.0;
};

/// Compares central differences of E_sigma along a trajectory recorded at a
/// uniform stride with the pairing int v_sigma N(v_sigma) at the same times.
DerivativeCheck energy_derivative_check(const Trajectory& trajectory, double sigma,
                                        const ModelParams& p);

struct AlmostConservationReport {
  FitReport fit;  // log D(sigma) against log sigma
  double t_span = 0.0;
  std::vector<double> sigmas;
  std::vector<double> deviations;  // D(sigma) = sup_t |E_sigma(t) - E_sigma(0)|
  std::vector<double> initial_energies;
  std::vector<bool> used_in_fit;
  // D at t_span/4, t_span/2, t_span for every sigma (row-major by sigma)
  std::vector<double> span_fractions{0.25, 0.5, 1.0};
  std::vector<std::vector<double>> span_deviations;
  double max_doubling_growth = 0.0;  // max D(2t)/D(t)
  // max_s D(s) / (s^2 T (1 + E_s(0)^{1/2}) E_s(0)^{3/2})
  double almost_conservation_c = 0.0;
};

AlmostConservationReport almost_conservation_experiment(const SpectralField& eta0,
                                                        std::span<const double> sigma_list,
                                                        double t_span, const ModelParams& p,
                                                        const SolverConfig& solver);

struct RadiusEstimate {
  double sigma_est = 0.0;
  // slope of log|c| against |xi| (= -sigma_est) after the power-law term
  FitReport fit;
  double power_exponent = 0.0;  // fitted coefficient of log<xi>
  double curvature = 0.0;       // xi^2 coefficient of an extended fit
  bool exponential_tail = true;
  int modes_used = 0;
};

/// Fits log|c_k| = a - sigma |xi_k| + beta log<xi_k> over the modes whose
/// magnitude, relative to the largest coefficient, lies in (floor, ceiling).
/// A tail whose extended fit needs a significant xi^2 term is flagged as
/// non-exponential. Throws InsufficientDataError with fewer than 12 modes.
RadiusEstimate estimate_radius(const SpectralField& field, double floor = 1e-12,
                               double ceiling = 1e-4);

struct DecayReport {
  FitReport fit;       // log sigma_est against log t
  double alpha = 0.0;  // sigma ~ t^-alpha
  double min_sigma_sqrt_t = 0.0;
  bool lower_bound_holds = false;
};

/// Needs >= 5 points with positive times spanning at least one decade.
DecayReport decay_fit(std::span<const double> times, std::span<const double> sigma_estimates);

}  // namespace kdvbbm

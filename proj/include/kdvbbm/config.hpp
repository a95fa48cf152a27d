#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdvbbm/diagnostics.hpp"
#include "kdvbbm/ensemble.hpp"
#include "kdvbbm/model.hpp"
#include "kdvbbm/solver.hpp"

namespace kdvbbm {

/// Bad configuration. The message starts with the offending key path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DatumKind { pulse, random, snapshot };

struct DatumConfig {
  DatumKind kind = DatumKind::pulse;
  std::string path;  // snapshot file, kind == snapshot
  EnsembleOptions random{};
  PulseOptions pulse{};
};

struct LemmaSweepConfig {
  int p2_points = 400;
  int p3_points = 50;
  double xi_max = 20.0;
  long pairs = 1000000;
  double pair_range = 100.0;
  int weight_sigma_points = 1000;
  double weight_sigma_max = 10.0;
  int weight_xi_points = 2001;
  double weight_xi_max = 100.0;
};

struct EnsembleConfig {
  int n = 64;
  double length = 32.0;
  int count = 200;
  double sigma_min = 1e-3;
  double sigma_max = 1e-1;
  int sigma_points = 9;
};

struct DerivativeConfig {
  double sigma = 0.1;
  double t_end = 0.5;
  int stride = 10;  // solver steps between recorded snapshots
};

struct DiagnosticsConfig {
  LemmaSweepConfig lemmas{};
  EnsembleConfig ensemble{};
  DerivativeConfig derivative{};
  double spread_limit = 10.0;
  double slope_tolerance = 0.2;
};

// Measured constants. The defaults are the frozen output of `calibrate` on
// the default configuration.
struct CalibrationConfig {
  double contraction_c = 0.033825564297605484;
  double almost_conservation_c = 0.004679088598377232;
  double c_hat = 2.9963542576083197;
  std::string provenance =
      "calibrate: seed 20240601, ensemble 200 fields on N=64, datum pulse on N=512 L=64";
};

struct CalibrateConfig {
  double ratio_target = 0.5;
  int bisection_steps = 30;
};

struct PicardConfig {
  double sigma = 0.1;
  int iterations = 80;
  double ratio_limit = 0.5;
  double agreement_tolerance = 1e-8;
  int reference_steps = 2000;  // IFRK4 steps over one local span
};

struct AlmostConservationConfig {
  std::vector<double> sigmas{0.0125, 0.025, 0.05, 0.1, 0.2};
  double t_span = 0.0;  // 0: local_timespan at the largest sigma
  double slope_target = 2.0;
  double slope_tolerance = 0.3;
  double min_r_squared = 0.98;
  double max_doubling_growth = 3.0;  // linear growth plus 50%
};

struct RadiusConfig {
  double sigma0 = 0.5;
  double t_end = 100.0;
  double dt = 1e-2;
  int samples = 41;  // geometric in [t_end / 100, t_end], plus t = 0
  double floor = 1e-12;
  double ceiling = 1e-4;
};

struct ContinuationConfig {
  double sigma0 = 0.5;
  double t_star = 100.0;
  double safety = 0.5;
  double dt = 1e-2;
};

struct Config {
  SpectralGrid grid{512, 64.0};
  ModelParams params{};
  SolverConfig solver{};
  DatumConfig datum{};
  std::vector<double> sigma_observe{0.0, 0.1};
  std::uint64_t seed = 20240601;
  int threads = 1;
  DiagnosticsConfig diagnostics{};
  CalibrationConfig calibration{};
  CalibrateConfig calibrate{};
  PicardConfig picard{};
  AlmostConservationConfig almost_conservation{};
  RadiusConfig radius{};
  ContinuationConfig continuation{};
};

const char* to_string(DatumKind kind);

/// Parses JSON text; missing keys take defaults, unknown keys are errors.
Config parse_config_text(const std::string& text);
Config parse_config(const std::filesystem::path& path);
/// Fully resolved configuration as JSON text; parse_config_text inverts it.
std::string emit_config(const Config& config);

/// Reads a calibration file written by `calibrate` into config.calibration.
void load_calibration(Config& config, const std::filesystem::path& path);

}  // namespace kdvbbm

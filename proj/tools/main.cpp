#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "kdvbbm/commands.hpp"
#include "kdvbbm/error.hpp"

using namespace kdvbbm;

namespace {

void print_result(const CommandResult& r) {
  for (const auto& c : r.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << r.command << "/" << c.name << ": " << c.detail
              << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral simulator and estimate checker for the fifth-order KdV-BBM equation"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string config_path, calibration_path, manifest_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> t_star;
  RunOptions opts;
  std::string out = opts.out_dir.string();

  app.add_option("--seed", seed, "Override the configuration seed");
  app.add_option("--threads", threads, "Worker threads for ensemble sweeps")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_flag("--quiet", opts.quiet, "Only print the final check lines");

  const std::map<std::string, std::string> about{
      {"simulate", "Evolve the datum; trajectory.csv and snapshots"},
      {"verify-lemmas", "Brute-force sweeps of the weight inequalities"},
      {"verify-estimates", "Nonlinear and trilinear estimate ratios, energy-derivative identity"},
      {"almost-conservation", "Deviation of E_sigma against sigma over one local span"},
      {"radius-track", "Radius of analyticity sigma_est(t) and its decay rate"},
      {"continuation", "Modified energy bound over [0, t_star] with sigma ~ 1/sqrt(t_star)"},
      {"picard", "Contraction ratios of the Duhamel iteration"},
      {"calibrate", "Measure the contraction and almost-conservation constants"},
  };
  for (const auto& name : command_names()) {
    auto* sub = app.add_subcommand(name, about.count(name) ? about.at(name) : "");
    sub->add_option("--config", config_path, "JSON configuration (defaults if omitted)");
    sub->add_option("--calibration", calibration_path, "Calibration file written by calibrate");
    if (name == "continuation") sub->add_option("--t-star", t_star, "Length of the time window");
    // global flags are also accepted after the subcommand
    sub->fallthrough();
  }
  auto* replay = app.add_subcommand("replay", "Re-run a manifest and compare output checksums");
  replay->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required();
  replay->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  opts.out_dir = out;
  opts.t_star = t_star;

  try {
    if (replay->parsed()) {
      const ReplayResult r = replay_manifest(manifest_path, opts.out_dir, opts.quiet);
      print_result(r.rerun);
      for (const auto& m : r.mismatches) std::cout << "MISMATCH " << m << "\n";
      std::cout << (r.reproduced() ? "PASS replay: all checksums reproduced\n"
                                   : "FAIL replay: checksums differ\n");
      return r.reproduced() ? 0 : 1;
    }
    const auto* sub = app.get_subcommands().front();
    Config cfg = config_path.empty() ? Config{} : parse_config(config_path);
    if (!calibration_path.empty()) load_calibration(cfg, calibration_path);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    const CommandResult r = run_command(sub->get_name(), cfg, opts);
    print_result(r);
    return r.exit_code();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

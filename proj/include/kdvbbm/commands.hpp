#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kdvbbm/config.hpp"

namespace kdvbbm {

inline constexpr const char* kToolVersion = "1.0.0";

/// Bad command line or unknown subcommand (exit status 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunOptions {
  std::filesystem::path out_dir = "out";
  bool quiet = false;
  std::optional<double> t_star;  // continuation only
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct CommandResult {
  std::string command;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<OutputFile> outputs;
  double seconds = 0.0;

  bool passed() const;
  int exit_code() const { return passed() ? 0 : 1; }
  double metric(const std::string& name) const;
};

const std::vector<std::string>& command_names();

/// Runs one subcommand, writing its files and manifest.json under
/// options.out_dir. Throws UsageError for unknown commands.
CommandResult run_command(const std::string& command, const Config& config,
                          const RunOptions& options);

struct ReplayResult {
  CommandResult rerun;
  std::vector<std::string> mismatches;  // outputs whose checksum differs or is missing
  bool reproduced() const { return mismatches.empty(); }
};

/// Re-runs the command recorded in a manifest into out_dir and compares the
/// checksums of every listed output.
ReplayResult replay_manifest(const std::filesystem::path& manifest,
                             const std::filesystem::path& out_dir, bool quiet = true);

/// Initial datum described by the configuration.
SpectralField make_datum(const Config& config);

}  // namespace kdvbbm

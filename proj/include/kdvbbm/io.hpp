#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "kdvbbm/field.hpp"
#include "kdvbbm/model.hpp"

namespace kdvbbm {

inline constexpr int kSnapshotSchemaVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SnapshotMeta {
  double time = 0.0;
  ModelParams params{};
  std::vector<double> sigma_observed;
};

struct Snapshot {
  int schema_version = kSnapshotSchemaVersion;
  SnapshotMeta meta;
  SpectralField field;
};

/// JSON with coefficients as [re, im] pairs in k = -N/2 .. N/2-1 order,
/// printed with 17 significant digits so reading back is bit-exact.
void write_snapshot(const SpectralField& field, const SnapshotMeta& meta,
                    const std::filesystem::path& path);
/// Throws FormatError on malformed or truncated files and unknown schema
/// versions, SymmetryError when the coefficients are not those of a real field.
Snapshot read_snapshot(const std::filesystem::path& path);

/// A table of numbers with named columns.
struct Series {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

/// Numbers at 17 significant digits; header only for an empty series.
void write_series(const Series& series, const std::filesystem::path& path);

/// Rows of mixed text, for reports whose fields are not all numeric.
void write_table(const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows,
                 const std::filesystem::path& path);

std::string format_double(double v);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace kdvbbm

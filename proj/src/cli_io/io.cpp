#include "kdvbbm/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "kdvbbm/error.hpp"

namespace kdvbbm {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kSymmetryTolerance = 1e-12;

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

std::ofstream open_out(const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

void write_snapshot(const SpectralField& field, const SnapshotMeta& meta,
                    const std::filesystem::path& path) {
  // Written by hand so the number format is fixed at 17 digits.
  std::ostringstream os;
  const auto& p = meta.params;
  os << "{\n  \"schema_version\": " << kSnapshotSchemaVersion << ",\n"
     << "  \"time\": " << format_double(meta.time) << ",\n"
     << "  \"grid\": {\"n_modes\": " << field.size()
     << ", \"length\": " << format_double(field.grid().length()) << "},\n"
     << "  \"params\": {\"gamma\": " << format_double(p.gamma)
     << ", \"gamma1\": " << format_double(p.gamma1) << ", \"gamma2\": " << format_double(p.gamma2)
     << ", \"delta1\": " << format_double(p.delta1) << ", \"delta2\": " << format_double(p.delta2)
     << "},\n  \"sigma_observed\": [";
  for (std::size_t i = 0; i < meta.sigma_observed.size(); ++i) {
    os << (i ? ", " : "") << format_double(meta.sigma_observed[i]);
  }
  os << "],\n  \"coefficients\": [";
  for (int i = 0; i < field.size(); ++i) {
    os << (i ? ",\n    " : "\n    ") << "[" << format_double(field[i].real()) << ", "
       << format_double(field[i].imag()) << "]";
  }
  os << "\n  ]\n}\n";
  auto out = open_out(path);
  out << os.str();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open snapshot '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("snapshot '" + path.string() + "' is malformed: " + e.what());
  }
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSnapshotSchemaVersion) {
      throw FormatError("snapshot '" + path.string() + "': unsupported schema_version " +
                        std::to_string(version));
    }
    const auto& g = j.at("grid");
    const SpectralGrid grid(g.at("n_modes").get<int>(), g.at("length").get<double>());
    const auto& coeffs = j.at("coefficients");
    if (!coeffs.is_array() || static_cast<int>(coeffs.size()) != grid.size()) {
      throw FormatError("snapshot '" + path.string() + "': expected " +
                        std::to_string(grid.size()) + " coefficients");
    }
    std::vector<Complex> c;
    c.reserve(coeffs.size());
    for (const auto& pair : coeffs) {
      if (!pair.is_array() || pair.size() != 2) {
        throw FormatError("snapshot '" + path.string() + "': coefficients must be [re, im]");
      }
      c.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    Snapshot snap{version, {}, SpectralField(grid, std::move(c))};
    snap.meta.time = j.at("time").get<double>();
    const auto& p = j.at("params");
    snap.meta.params = {p.at("gamma").get<double>(), p.at("gamma1").get<double>(),
                        p.at("gamma2").get<double>(), p.at("delta1").get<double>(),
                        p.at("delta2").get<double>()};
    snap.meta.sigma_observed = j.at("sigma_observed").get<std::vector<double>>();
    if (snap.field.symmetry_residue() > kSymmetryTolerance) {
      throw SymmetryError("snapshot '" + path.string() +
                          "': coefficients are not Hermitian-symmetric");
    }
    return snap;
  } catch (const Json::exception& e) {
    throw FormatError("snapshot '" + path.string() + "' is incomplete: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError("snapshot '" + path.string() + "': " + e.what());
  }
}

void Series::add(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("Series::add: row has " + std::to_string(row.size()) +
                                " fields, expected " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

void write_series(const Series& series, const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(series.rows.size());
  for (const auto& r : series.rows) {
    if (r.size() != series.columns.size()) throw std::invalid_argument("write_series: ragged rows");
    std::vector<std::string> cells;
    for (double v : r) cells.push_back(format_double(v));
    rows.push_back(std::move(cells));
  }
  write_table(series.columns, rows, path);
}

void write_table(const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows,
                 const std::filesystem::path& path) {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_field(columns[i]);
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
    os << "\n";
  }
  auto out = open_out(path);
  out << os.str();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return sha256_hex(os.str());
}

}  // namespace kdvbbm

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "kdvbbm/commands.hpp"
#include "kdvbbm/config.hpp"
#include "kdvbbm/ensemble.hpp"
#include "kdvbbm/error.hpp"
#include "kdvbbm/io.hpp"

using namespace kdvbbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("kdvbbm_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

bool bit_equal(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) return false;
  for (int i = 0; i < a.size(); ++i) {
    if (a[i].real() != b[i].real() || a[i].imag() != b[i].imag()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("a minimal config takes the defaults") {
  Config c = parse_config_text(R"({"grid": {"n": 128}})");
  CHECK(c.grid.size() == 128);
  CHECK(c.grid.length() == 64.0);
  CHECK(c.params == ModelParams{});
  CHECK(c.solver.dt == 1e-3);
  CHECK(c.datum.kind == DatumKind::pulse);
  CHECK(parse_config_text("{}").seed == 20240601);
}

TEST_CASE("config errors name the key") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"params": {"delta1": -1}})"),
                       doctest::Contains("params.delta1"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"solver": {"dtt": 1}})"),
                       doctest::Contains("solver.dtt: unknown key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"grid": {"n": "big"}})"),
                       doctest::Contains("grid.n: wrong type"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"grid": {"n": 31, "L": 1}})"), doctest::Contains("grid.n"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"solver": {"method": "euler"}})"),
                       doctest::Contains("solver.method"), ConfigError);
}

TEST_CASE("config round trip") {
  Config c = parse_config_text(R"({"params": {"gamma": 0.2, "delta2": 0.5},
      "solver": {"dt": 0.005, "method": "rk4"}, "datum": {"kind": "random", "amplitude": 0.3},
      "sigma_observe": [0, 0.05, 0.2], "seed": 99})");
  const std::string text = emit_config(c);
  Config back = parse_config_text(text);
  CHECK(emit_config(back) == text);
  CHECK(back.params.gamma == 0.2);
  CHECK(back.solver.method == Method::rk4);
  CHECK(back.datum.random.amplitude == 0.3);
  CHECK(back.sigma_observe.size() == 3);
  CHECK(back.seed == 99);
}

TEST_CASE("snapshots round trip bit-exactly") {
  auto dir = scratch("snap");
  SpectralGrid g(64, 32.0);
  SnapshotMeta meta{0.125, ModelParams{}, {0.0, 0.1}};
  std::vector<SpectralField> fields{SpectralField(g), random_analytic_field(g, 1)};
  // awkward magnitudes, Nyquist included
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  SpectralField wild(g);
  for (int k = 1; k < 32; ++k) {
    const Complex c(n(rng) * std::pow(10.0, -k), n(rng) / 3.0);
    wild[g.index_of_mode(k)] = c;
    wild[g.index_of_mode(-k)] = std::conj(c);
  }
  wild[0] = 1.0 / 7.0;
  wild[g.index_of_mode(0)] = std::nextafter(1.0, 2.0);
  fields.push_back(wild);
  for (const auto& f : fields) {
    write_snapshot(f, meta, dir / "s.json");
    auto s = read_snapshot(dir / "s.json");
    CHECK(s.schema_version == kSnapshotSchemaVersion);
    CHECK(s.meta.time == 0.125);
    CHECK(s.meta.sigma_observed == meta.sigma_observed);
    CHECK(bit_equal(s.field, f));
  }
}

TEST_CASE("broken snapshots are rejected") {
  auto dir = scratch("broken");
  SpectralGrid g(16, 4.0);
  write_snapshot(random_analytic_field(g, 2), {}, dir / "s.json");
  const std::string text = slurp(dir / "s.json");
  std::ofstream(dir / "t.json") << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(read_snapshot(dir / "t.json"), FormatError);
  CHECK_THROWS_AS(read_snapshot(dir / "missing.json"), FormatError);

  auto bumped = text;
  bumped.replace(bumped.find("\"schema_version\": 1"), 19, "\"schema_version\": 7");
  std::ofstream(dir / "v.json") << bumped;
  CHECK_THROWS_AS(read_snapshot(dir / "v.json"), FormatError);

  SpectralField bad(g);
  bad[g.index_of_mode(3)] = Complex(0, 1);  // no conjugate partner
  write_snapshot(bad, {}, dir / "b.json");
  CHECK_THROWS_AS(read_snapshot(dir / "b.json"), SymmetryError);
}

TEST_CASE("series output") {
  auto dir = scratch("series");
  Series s;
  s.columns = {"a", "b"};
  write_series(s, dir / "empty.csv");
  CHECK(slurp(dir / "empty.csv") == "a,b\n");
  s.add({0.1, 2});
  write_series(s, dir / "one.csv");
  CHECK(slurp(dir / "one.csv") == "a,b\n0.10000000000000001,2\n");
  CHECK_THROWS(s.add({1}));
  write_table({"x"}, {{"has,comma"}}, dir / "t.csv");
  CHECK(slurp(dir / "t.csv") == "x\n\"has,comma\"\n");
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  auto dir = scratch("sha");
  std::ofstream(dir / "f") << "abc";
  CHECK(sha256_file(dir / "f") == sha256_hex("abc"));
}

TEST_CASE("commands") {
  Config c;
  RunOptions o;
  o.quiet = true;
  o.out_dir = scratch("cmd");
  CHECK_THROWS_AS(run_command("frobnicate", c, o), UsageError);
  CHECK(command_names().size() == 8);

  c.grid = SpectralGrid(128, 64.0);
  c.solver.t_end = 0.0;
  auto r = run_command("simulate", c, o);
  CHECK(r.passed());
  CHECK(r.metric("records") == 1.0);
  CHECK(fs::exists(o.out_dir / "snapshots/snapshot_000000.json"));
  CHECK_FALSE(fs::exists(o.out_dir / "snapshots/snapshot_000001.json"));
  CHECK(fs::exists(o.out_dir / "manifest.json"));
  // a box too short for the pulses is flagged
  c.grid = SpectralGrid(64, 32.0);
  auto short_box = run_command("simulate", c, o);
  CHECK_FALSE(short_box.passed());
  c.grid = SpectralGrid(128, 64.0);
  r = run_command("simulate", c, o);
  auto snap = read_snapshot(o.out_dir / "snapshots/snapshot_000000.json");
  CHECK(bit_equal(snap.field, make_datum(c)));

  auto rep = replay_manifest(o.out_dir / "manifest.json", scratch("cmd_replay"));
  CHECK(rep.reproduced());
}

TEST_CASE("snapshot datum must match the grid") {
  auto dir = scratch("datum");
  write_snapshot(random_analytic_field(SpectralGrid(32, 16.0), 1), {}, dir / "d.json");
  Config c;
  c.datum.kind = DatumKind::snapshot;
  c.datum.path = (dir / "d.json").string();
  CHECK_THROWS_AS(make_datum(c), GridMismatchError);
  c.grid = SpectralGrid(32, 16.0);
  CHECK(make_datum(c).size() == 32);
}

#include "kdvbbm/config.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

namespace kdvbbm {

namespace {

using Json = nlohmann::ordered_json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + ": expected an object");
  }
  ~Section() = default;

  std::string where() const { return path_.empty() ? "<root>" : path_; }
  std::string key_path(const std::string& key) const { return join(path_, key); }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const Json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v->is_number()) throw ConfigError("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v->is_number_integer()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError("");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw ConfigError("");
      }
      out = v->get<T>();
    } catch (const std::exception&) {
      throw ConfigError(key_path(key) + ": wrong type (" + std::string(v->type_name()) + ")");
    }
  }

  void read_list(const std::string& key, std::vector<double>& out) {
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_array()) throw ConfigError(key_path(key) + ": expected an array of numbers");
    out.clear();
    for (const auto& x : *v) {
      if (!x.is_number()) throw ConfigError(key_path(key) + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
  }

  std::optional<Section> child(const std::string& key) {
    const Json* v = find(key);
    if (!v) return std::nullopt;
    return Section(*v, key_path(key));
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(key_path(item.key()) + ": unknown key");
    }
  }

 private:
  const Json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw ConfigError(path + ": " + what);
}

void positive(double v, const std::string& path) {
  require(v > 0.0 && std::isfinite(v), path, "must be > 0");
}

void at_least(long v, long lo, const std::string& path) {
  require(v >= lo, path, "must be >= " + std::to_string(lo));
}

DatumKind datum_kind(const std::string& s) {
  if (s == "pulse") return DatumKind::pulse;
  if (s == "random") return DatumKind::random;
  if (s == "snapshot") return DatumKind::snapshot;
  throw ConfigError("datum.kind: expected pulse, random or snapshot, got '" + s + "'");
}

void read_calibration(Section& s, CalibrationConfig& c) {
  s.read("contraction_c", c.contraction_c);
  s.read("almost_conservation_c", c.almost_conservation_c);
  s.read("c_hat", c.c_hat);
  s.read("provenance", c.provenance);
  s.finish();
  positive(c.contraction_c, "calibration.contraction_c");
  positive(c.almost_conservation_c, "calibration.almost_conservation_c");
  positive(c.c_hat, "calibration.c_hat");
}

Config from_json(const Json& root) {
  Config cfg;
  Section top(root, "");

  if (auto s = top.child("grid")) {
    int n = cfg.grid.size();
    double length = cfg.grid.length();
    s->read("n", n);
    s->read("L", length);
    s->finish();
    require(n >= 8 && n % 2 == 0, "grid.n", "must be even and >= 8");
    positive(length, "grid.L");
    cfg.grid = SpectralGrid(n, length);
  }

  if (auto s = top.child("params")) {
    auto& p = cfg.params;
    s->read("gamma", p.gamma);
    s->read("gamma1", p.gamma1);
    s->read("gamma2", p.gamma2);
    s->read("delta1", p.delta1);
    s->read("delta2", p.delta2);
    s->finish();
    require(p.gamma1 > 0.0, "params.gamma1", "must be > 0");
    require(p.delta1 > 0.0, "params.delta1", "must be > 0");
    for (double v : {p.gamma, p.gamma2, p.delta2}) require(std::isfinite(v), "params", "values must be finite");
  }

  if (auto s = top.child("solver")) {
    auto& sv = cfg.solver;
    std::string method = to_string(sv.method);
    s->read("method", method);
    s->read("dt", sv.dt);
    s->read("t_end", sv.t_end);
    s->read("picard_nodes", sv.picard_quadrature_nodes);
    s->read("observer_stride", sv.observer_stride);
    s->read("keep_snapshots", sv.keep_snapshots);
    s->finish();
    try {
      sv.method = method_from_string(method);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("solver.method: ") + e.what());
    }
    positive(sv.dt, "solver.dt");
    require(sv.t_end >= 0.0, "solver.t_end", "must be >= 0");
    at_least(sv.picard_quadrature_nodes, 8, "solver.picard_nodes");
    at_least(sv.observer_stride, 1, "solver.observer_stride");
  }

  if (auto s = top.child("datum")) {
    auto& d = cfg.datum;
    std::string kind = to_string(d.kind);
    s->read("kind", kind);
    d.kind = datum_kind(kind);
    s->read("path", d.path);
    s->read("band_modes", d.random.band_modes);
    s->read("amplitude", d.random.amplitude);
    s->read("rho_min", d.random.rho_min);
    s->read("rho_max", d.random.rho_max);
    s->read("pulses", d.pulse.pulses);
    s->read("pulse_amplitude_min", d.pulse.amplitude_min);
    s->read("pulse_amplitude_max", d.pulse.amplitude_max);
    s->read("pulse_width_min", d.pulse.width_min);
    s->read("pulse_width_max", d.pulse.width_max);
    s->read("pulse_center_spread", d.pulse.center_spread);
    s->finish();
    require(d.kind != DatumKind::snapshot || !d.path.empty(), "datum.path",
            "required when kind is snapshot");
    at_least(d.random.band_modes, 0, "datum.band_modes");
    require(d.random.band_modes <= cfg.grid.size() / 2, "datum.band_modes", "exceeds N/2");
    positive(d.random.rho_min, "datum.rho_min");
    require(d.random.rho_max >= d.random.rho_min, "datum.rho_max", "must be >= rho_min");
    at_least(d.pulse.pulses, 1, "datum.pulses");
    positive(d.pulse.width_min, "datum.pulse_width_min");
    require(d.pulse.width_max >= d.pulse.width_min, "datum.pulse_width_max", "must be >= pulse_width_min");
  }

  top.read_list("sigma_observe", cfg.sigma_observe);
  for (double s : cfg.sigma_observe) require(s >= 0.0, "sigma_observe", "entries must be >= 0");
  if (const Json* v = top.find("seed")) {
    require(v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0),
            "seed", "must be a non-negative integer");
    cfg.seed = v->get<std::uint64_t>();
  }
  top.read("threads", cfg.threads);
  at_least(cfg.threads, 1, "threads");

  if (auto s = top.child("diagnostics")) {
    auto& d = cfg.diagnostics;
    if (auto l = s->child("lemmas")) {
      auto& m = d.lemmas;
      l->read("p2_points", m.p2_points);
      l->read("p3_points", m.p3_points);
      l->read("xi_max", m.xi_max);
      l->read("pairs", m.pairs);
      l->read("pair_range", m.pair_range);
      l->read("weight_sigma_points", m.weight_sigma_points);
      l->read("weight_sigma_max", m.weight_sigma_max);
      l->read("weight_xi_points", m.weight_xi_points);
      l->read("weight_xi_max", m.weight_xi_max);
      l->finish();
      at_least(m.p2_points, 2, "diagnostics.lemmas.p2_points");
      at_least(m.p3_points, 2, "diagnostics.lemmas.p3_points");
      positive(m.xi_max, "diagnostics.lemmas.xi_max");
      at_least(m.pairs, 1, "diagnostics.lemmas.pairs");
      require(m.pair_range > 0.0 && m.pair_range <= 300.0, "diagnostics.lemmas.pair_range",
              "must lie in (0, 300]");
      at_least(m.weight_sigma_points, 2, "diagnostics.lemmas.weight_sigma_points");
      positive(m.weight_sigma_max, "diagnostics.lemmas.weight_sigma_max");
      at_least(m.weight_xi_points, 2, "diagnostics.lemmas.weight_xi_points");
      positive(m.weight_xi_max, "diagnostics.lemmas.weight_xi_max");
    }
    if (auto e = s->child("ensemble")) {
      auto& m = d.ensemble;
      e->read("n", m.n);
      e->read("L", m.length);
      e->read("count", m.count);
      e->read("sigma_min", m.sigma_min);
      e->read("sigma_max", m.sigma_max);
      e->read("sigma_points", m.sigma_points);
      e->finish();
      require(m.n >= 8 && m.n % 2 == 0, "diagnostics.ensemble.n", "must be even and >= 8");
      positive(m.length, "diagnostics.ensemble.L");
      at_least(m.count, 1, "diagnostics.ensemble.count");
      positive(m.sigma_min, "diagnostics.ensemble.sigma_min");
      require(m.sigma_max > m.sigma_min, "diagnostics.ensemble.sigma_max", "must exceed sigma_min");
      at_least(m.sigma_points, 3, "diagnostics.ensemble.sigma_points");
    }
    if (auto e = s->child("derivative")) {
      auto& m = d.derivative;
      e->read("sigma", m.sigma);
      e->read("t_end", m.t_end);
      e->read("stride", m.stride);
      e->finish();
      require(m.sigma >= 0.0, "diagnostics.derivative.sigma", "must be >= 0");
      positive(m.t_end, "diagnostics.derivative.t_end");
      at_least(m.stride, 1, "diagnostics.derivative.stride");
    }
    s->read("spread_limit", d.spread_limit);
    s->read("slope_tolerance", d.slope_tolerance);
    s->finish();
    positive(d.spread_limit, "diagnostics.spread_limit");
    positive(d.slope_tolerance, "diagnostics.slope_tolerance");
  }

  if (auto s = top.child("calibration")) read_calibration(*s, cfg.calibration);

  if (auto s = top.child("calibrate")) {
    auto& c = cfg.calibrate;
    s->read("ratio_target", c.ratio_target);
    s->read("bisection_steps", c.bisection_steps);
    s->finish();
    require(c.ratio_target > 0.0 && c.ratio_target < 1.0, "calibrate.ratio_target", "must lie in (0, 1)");
    at_least(c.bisection_steps, 1, "calibrate.bisection_steps");
  }

  if (auto s = top.child("picard")) {
    auto& c = cfg.picard;
    s->read("sigma", c.sigma);
    s->read("iterations", c.iterations);
    s->read("ratio_limit", c.ratio_limit);
    s->read("agreement_tolerance", c.agreement_tolerance);
    s->read("reference_steps", c.reference_steps);
    s->finish();
    require(c.sigma >= 0.0, "picard.sigma", "must be >= 0");
    at_least(c.iterations, 1, "picard.iterations");
    positive(c.ratio_limit, "picard.ratio_limit");
    positive(c.agreement_tolerance, "picard.agreement_tolerance");
    at_least(c.reference_steps, 1, "picard.reference_steps");
  }

  if (auto s = top.child("almost_conservation")) {
    auto& c = cfg.almost_conservation;
    s->read_list("sigmas", c.sigmas);
    s->read("t_span", c.t_span);
    s->read("slope_target", c.slope_target);
    s->read("slope_tolerance", c.slope_tolerance);
    s->read("min_r_squared", c.min_r_squared);
    s->read("max_doubling_growth", c.max_doubling_growth);
    s->finish();
    require(c.sigmas.size() >= 3, "almost_conservation.sigmas", "need at least 3 values");
    for (double v : c.sigmas) positive(v, "almost_conservation.sigmas");
    require(c.t_span >= 0.0, "almost_conservation.t_span", "must be >= 0 (0 = automatic)");
  }

  if (auto s = top.child("radius")) {
    auto& c = cfg.radius;
    s->read("sigma0", c.sigma0);
    s->read("t_end", c.t_end);
    s->read("dt", c.dt);
    s->read("samples", c.samples);
    s->read("floor", c.floor);
    s->read("ceiling", c.ceiling);
    s->finish();
    positive(c.sigma0, "radius.sigma0");
    positive(c.t_end, "radius.t_end");
    positive(c.dt, "radius.dt");
    at_least(c.samples, 5, "radius.samples");
    positive(c.floor, "radius.floor");
    require(c.ceiling > c.floor, "radius.ceiling", "must exceed radius.floor");
  }

  if (auto s = top.child("continuation")) {
    auto& c = cfg.continuation;
    s->read("sigma0", c.sigma0);
    s->read("t_star", c.t_star);
    s->read("safety", c.safety);
    s->read("dt", c.dt);
    s->finish();
    positive(c.sigma0, "continuation.sigma0");
    positive(c.t_star, "continuation.t_star");
    require(c.safety > 0.0 && c.safety <= 1.0, "continuation.safety", "must lie in (0, 1]");
    positive(c.dt, "continuation.dt");
  }

  top.finish();
  return cfg;
}

Json to_json(const Config& c) {
  Json j;
  j["grid"] = {{"n", c.grid.size()}, {"L", c.grid.length()}};
  j["params"] = {{"gamma", c.params.gamma},   {"gamma1", c.params.gamma1},
                 {"gamma2", c.params.gamma2}, {"delta1", c.params.delta1},
                 {"delta2", c.params.delta2}};
  j["solver"] = {{"method", to_string(c.solver.method)},
                 {"dt", c.solver.dt},
                 {"t_end", c.solver.t_end},
                 {"picard_nodes", c.solver.picard_quadrature_nodes},
                 {"observer_stride", c.solver.observer_stride},
                 {"keep_snapshots", c.solver.keep_snapshots}};
  const auto& d = c.datum;
  j["datum"] = {{"kind", to_string(d.kind)},
                {"path", d.path},
                {"band_modes", d.random.band_modes},
                {"amplitude", d.random.amplitude},
                {"rho_min", d.random.rho_min},
                {"rho_max", d.random.rho_max},
                {"pulses", d.pulse.pulses},
                {"pulse_amplitude_min", d.pulse.amplitude_min},
                {"pulse_amplitude_max", d.pulse.amplitude_max},
                {"pulse_width_min", d.pulse.width_min},
                {"pulse_width_max", d.pulse.width_max},
                {"pulse_center_spread", d.pulse.center_spread}};
  j["sigma_observe"] = c.sigma_observe;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  const auto& l = c.diagnostics.lemmas;
  const auto& e = c.diagnostics.ensemble;
  const auto& dv = c.diagnostics.derivative;
  j["diagnostics"] = {
      {"lemmas",
       {{"p2_points", l.p2_points},
        {"p3_points", l.p3_points},
        {"xi_max", l.xi_max},
        {"pairs", l.pairs},
        {"pair_range", l.pair_range},
        {"weight_sigma_points", l.weight_sigma_points},
        {"weight_sigma_max", l.weight_sigma_max},
        {"weight_xi_points", l.weight_xi_points},
        {"weight_xi_max", l.weight_xi_max}}},
      {"ensemble",
       {{"n", e.n},
        {"L", e.length},
        {"count", e.count},
        {"sigma_min", e.sigma_min},
        {"sigma_max", e.sigma_max},
        {"sigma_points", e.sigma_points}}},
      {"derivative", {{"sigma", dv.sigma}, {"t_end", dv.t_end}, {"stride", dv.stride}}},
      {"spread_limit", c.diagnostics.spread_limit},
      {"slope_tolerance", c.diagnostics.slope_tolerance}};
  j["calibration"] = {{"contraction_c", c.calibration.contraction_c},
                      {"almost_conservation_c", c.calibration.almost_conservation_c},
                      {"c_hat", c.calibration.c_hat},
                      {"provenance", c.calibration.provenance}};
  j["calibrate"] = {{"ratio_target", c.calibrate.ratio_target},
                    {"bisection_steps", c.calibrate.bisection_steps}};
  j["picard"] = {{"sigma", c.picard.sigma},
                 {"iterations", c.picard.iterations},
                 {"ratio_limit", c.picard.ratio_limit},
                 {"agreement_tolerance", c.picard.agreement_tolerance},
                 {"reference_steps", c.picard.reference_steps}};
  const auto& a = c.almost_conservation;
  j["almost_conservation"] = {{"sigmas", a.sigmas},
                              {"t_span", a.t_span},
                              {"slope_target", a.slope_target},
                              {"slope_tolerance", a.slope_tolerance},
                              {"min_r_squared", a.min_r_squared},
                              {"max_doubling_growth", a.max_doubling_growth}};
  j["radius"] = {{"sigma0", c.radius.sigma0}, {"t_end", c.radius.t_end},
                 {"dt", c.radius.dt},         {"samples", c.radius.samples},
                 {"floor", c.radius.floor},   {"ceiling", c.radius.ceiling}};
  j["continuation"] = {{"sigma0", c.continuation.sigma0},
                       {"t_star", c.continuation.t_star},
                       {"safety", c.continuation.safety},
                       {"dt", c.continuation.dt}};
  return j;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

}  // namespace

const char* to_string(DatumKind kind) {
  switch (kind) {
    case DatumKind::pulse: return "pulse";
    case DatumKind::random: return "random";
    case DatumKind::snapshot: return "snapshot";
  }
  return "?";
}

Config parse_config_text(const std::string& text) {
  return from_json(parse_json(text, "config parse error"));
}

Config parse_config(const std::filesystem::path& path) {
  return parse_config_text(read_text(path));
}

std::string emit_config(const Config& config) {
  // max_digits10 keeps every double exact through a round trip
  return to_json(config).dump(2);
}

void load_calibration(Config& config, const std::filesystem::path& path) {
  const Json j = parse_json(read_text(path), "calibration parse error");
  Section top(j, "");
  auto s = top.child("calibration");
  if (!s) throw ConfigError("calibration: missing in '" + path.string() + "'");
  CalibrationConfig c;
  read_calibration(*s, c);
  // Files written by `calibrate` also carry the evidence; it is not needed here.
  top.find("evidence");
  top.finish();
  config.calibration = c;
}

}  // namespace kdvbbm

#pragma once

// Run configuration: a JSON document plus flat command-line overrides.
// Unknown keys, type mismatches and missing required fields are errors that
// name the offending key. Everything is validated before computation.

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "rydmf/core.hpp"
#include "rydmf/drive.hpp"
#include "rydmf/dynamics.hpp"
#include "rydmf/spectral.hpp"

namespace rydmf {

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class Protocol {
  integrate,
  fixed_points,
  basin,
  hysteresis,
  scan,
  mod_map,
  bistability_map,
  fourier_map,
  calibrate_kick,
  oracle_check
};

inline const std::vector<std::pair<Protocol, std::string>>& protocol_names() {
  static const std::vector<std::pair<Protocol, std::string>> names{
      {Protocol::integrate, "integrate"},
      {Protocol::fixed_points, "fixed-points"},
      {Protocol::basin, "basin"},
      {Protocol::hysteresis, "hysteresis"},
      {Protocol::scan, "scan"},
      {Protocol::mod_map, "mod-map"},
      {Protocol::bistability_map, "bistability-map"},
      {Protocol::fourier_map, "fourier-map"},
      {Protocol::calibrate_kick, "calibrate-kick"},
      {Protocol::oracle_check, "oracle-check"}};
  return names;
}

inline std::string to_string(Protocol p) {
  for (const auto& [k, n] : protocol_names())
    if (k == p) return n;
  return "?";
}

inline Protocol protocol_from_string(const std::string& s) {
  for (const auto& [k, n] : protocol_names())
    if (n == s) return k;
  throw ConfigError("unknown protocol '" + s + "'");
}

/// Initial condition: a named branch or an explicit Bloch state.
struct InitialCondition {
  enum class Kind { low, high, ground, explicit_state } kind = Kind::low;
  BlochState state{};
};

/// Either an explicit list or lo/hi/n.
struct AxisSpec {
  std::vector<double> values;
};

struct RunConfig {
  Protocol protocol = Protocol::integrate;
  SystemParams params{};
  std::optional<DriveWaveform> drive;
  std::uint64_t seed = 1;

  // integrate / oracle-check timing
  double t0 = 0.0;
  double t1 = 2100.0;
  double dt_out = 0.25;
  InitialCondition initial{};

  // basin
  BasinPlane plane{};
  BasinGrid basin_grid{};

  // hysteresis / scan / maps
  AxisSpec delta_axis{};   ///< detuning grid (hysteresis, bistability-map, fourier-map)
  AxisSpec omega_axis{};   ///< Rabi grid (mod-map, bistability-map)
  double sweep_rate = 5e-4;
  double scan_rate = 2e-4;
  double scan_delta_lo = 2.5, scan_delta_hi = 4.5;
  std::size_t window_periods = 8;
  double samples_per_period = 200.0;

  // driven analysis
  ResponseWindow analysis{};

  // calibrate-kick
  double amp_lo = -10.0, amp_hi = -1.0;
  std::size_t amp_steps = 37;

  // oracle-check
  std::size_t oracle_draws = 20;

  nlohmann::json source;  ///< validated input document (echoed in the manifest)
};

/// Flag values that take precedence over the config file.
struct FlagOverrides {
  std::optional<double> omega, delta0, vbar, drive_period, kick_amp, kick_tau;
};

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("'" + path + "' must be an object");
  for (const auto& [k, _] : obj.items())
    if (!allowed.contains(k)) throw ConfigError("unknown key '" + (path.empty() ? k : path + "." + k) + "'");
}

inline std::string key_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double number(const json& obj, const std::string& path, const std::string& key, std::optional<double> dflt) {
  if (!obj.contains(key)) {
    if (dflt) return *dflt;
    throw ConfigError("missing required field '" + key_path(path, key) + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError("type mismatch for '" + key_path(path, key) + "': expected number");
  return v.get<double>();
}

inline std::size_t count(const json& obj, const std::string& path, const std::string& key, std::size_t dflt) {
  if (!obj.contains(key)) return dflt;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError("type mismatch for '" + key_path(path, key) + "': expected non-negative integer");
  return v.get<std::size_t>();
}

inline std::string text(const json& obj, const std::string& path, const std::string& key, const std::string& dflt) {
  if (!obj.contains(key)) return dflt;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError("type mismatch for '" + key_path(path, key) + "': expected string");
  return v.get<std::string>();
}

inline AxisSpec axis(const json& obj, const std::string& path, const std::string& key, const AxisSpec& dflt) {
  if (!obj.contains(key)) return dflt;
  const auto& v = obj.at(key);
  const std::string p = key_path(path, key);
  AxisSpec a;
  if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("type mismatch for '" + p + "': expected array of numbers");
      a.values.push_back(e.get<double>());
    }
  } else if (v.is_object()) {
    check_keys(v, p, {"lo", "hi", "n"});
    const double lo = number(v, p, "lo", std::nullopt), hi = number(v, p, "hi", std::nullopt);
    const std::size_t n = count(v, p, "n", 0);
    if (n == 0) throw ConfigError("missing required field '" + p + ".n'");
    a.values = linspace(lo, hi, n);
  } else {
    throw ConfigError("type mismatch for '" + p + "': expected array or {lo, hi, n}");
  }
  if (a.values.empty()) throw ConfigError("'" + p + "' must not be empty");
  return a;
}

inline Coordinate coordinate(const std::string& s, const std::string& path) {
  if (s == "sigma_x") return Coordinate::sigma_x;
  if (s == "sigma_y") return Coordinate::sigma_y;
  if (s == "n_r") return Coordinate::n_r;
  throw ConfigError("invalid value for '" + path + "': '" + s + "'");
}

}  // namespace detail

/// Parses and validates a configuration. `protocol` (from the subcommand)
/// must agree with a "protocol" key if the document has one.
inline RunConfig parse_config(const nlohmann::json& doc, Protocol protocol, const FlagOverrides& flags = {}) {
  using namespace detail;
  check_keys(doc, "", {"protocol", "params", "drive", "seed", "integrate", "initial", "basin", "sweep", "scan",
                       "grid", "analysis", "calibrate", "oracle"});
  RunConfig c;
  c.protocol = protocol;
  if (doc.contains("protocol")) {
    if (!doc["protocol"].is_string()) throw ConfigError("type mismatch for 'protocol': expected string");
    if (protocol_from_string(doc["protocol"].get<std::string>()) != protocol)
      throw ConfigError("config protocol '" + doc["protocol"].get<std::string>() + "' does not match subcommand '" +
                        to_string(protocol) + "'");
  }
  c.seed = count(doc, "", "seed", 1);

  // params
  const json params = doc.contains("params") ? doc["params"] : json::object();
  check_keys(params, "params", {"omega", "delta0", "vbar", "gamma"});
  const auto param = [&](const char* key, const std::optional<double>& flag, std::optional<double> dflt) {
    return flag ? *flag : number(params, "params", key, dflt);
  };
  c.params.omega = param("omega", flags.omega, std::nullopt);
  c.params.delta0 = param("delta0", flags.delta0, std::nullopt);
  c.params.vbar = param("vbar", flags.vbar, std::nullopt);
  c.params.gamma = number(params, "params", "gamma", 1.0);
  try {
    validate_params(c.params);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }

  // drive
  if (doc.contains("drive") || flags.drive_period || flags.kick_amp || flags.kick_tau) {
    const json d = doc.contains("drive") ? doc["drive"] : json::object();
    check_keys(d, "drive", {"period", "kick_amplitude", "kick_duration", "shape", "t_offset"});
    const DriveWaveform def = default_drive();
    DriveWaveform w;
    w.period = flags.drive_period ? *flags.drive_period : number(d, "drive", "period", def.period);
    w.amplitude = flags.kick_amp ? *flags.kick_amp : number(d, "drive", "kick_amplitude", def.amplitude);
    w.duration = flags.kick_tau ? *flags.kick_tau : number(d, "drive", "kick_duration", def.duration);
    w.t_offset = number(d, "drive", "t_offset", 0.0);
    try {
      w.shape = kick_shape_from_string(text(d, "drive", "shape", "square"));
      c.drive = validate_drive(w);
    } catch (const ValidationError& e) {
      throw ConfigError(e.what());
    }
  }

  // timing
  const json integ = doc.contains("integrate") ? doc["integrate"] : json::object();
  check_keys(integ, "integrate", {"t0", "t1", "dt_out"});
  c.t0 = number(integ, "integrate", "t0", 0.0);
  c.t1 = number(integ, "integrate", "t1", c.drive ? 42.0 * c.drive->period : 100.0);
  c.dt_out = number(integ, "integrate", "dt_out", c.drive ? c.drive->period / 200.0 : 0.25);
  if (!(c.t1 > c.t0)) throw ConfigError("'integrate.t1' must exceed 'integrate.t0'");
  if (!(c.dt_out > 0.0)) throw ConfigError("'integrate.dt_out' must be positive");

  if (doc.contains("initial")) {
    const auto& v = doc["initial"];
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "low") c.initial.kind = InitialCondition::Kind::low;
      else if (s == "high") c.initial.kind = InitialCondition::Kind::high;
      else if (s == "ground") c.initial.kind = InitialCondition::Kind::ground;
      else throw ConfigError("invalid value for 'initial': '" + s + "'");
    } else if (v.is_array() && v.size() == 3 && v[0].is_number() && v[1].is_number() && v[2].is_number()) {
      c.initial.kind = InitialCondition::Kind::explicit_state;
      c.initial.state = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    } else {
      throw ConfigError("type mismatch for 'initial': expected \"low\", \"high\", \"ground\" or [sx, sy, n_r]");
    }
  }

  // basin
  const json basin = doc.contains("basin") ? doc["basin"] : json::object();
  check_keys(basin, "basin", {"horizontal", "vertical", "fixed_value", "h_min", "h_max", "v_min", "v_max", "nh", "nv"});
  c.plane.horizontal = coordinate(text(basin, "basin", "horizontal", "sigma_x"), "basin.horizontal");
  c.plane.vertical = coordinate(text(basin, "basin", "vertical", "n_r"), "basin.vertical");
  if (c.plane.horizontal == c.plane.vertical) throw ConfigError("'basin.vertical' must differ from 'basin.horizontal'");
  if (basin.contains("fixed_value")) c.plane.fixed_value = number(basin, "basin", "fixed_value", std::nullopt);
  c.plane.h_min = number(basin, "basin", "h_min", -1.0);
  c.plane.h_max = number(basin, "basin", "h_max", 1.0);
  c.plane.v_min = number(basin, "basin", "v_min", 0.0);
  c.plane.v_max = number(basin, "basin", "v_max", 1.0);
  c.basin_grid.nh = count(basin, "basin", "nh", 41);
  c.basin_grid.nv = count(basin, "basin", "nv", 41);
  if (c.basin_grid.nh == 0 || c.basin_grid.nv == 0) throw ConfigError("'basin.nh' and 'basin.nv' must be positive");

  // grids
  const json grid = doc.contains("grid") ? doc["grid"] : json::object();
  check_keys(grid, "grid", {"delta", "omega"});
  c.delta_axis = axis(grid, "grid", "delta", AxisSpec{linspace(-2.0, 8.0, 30)});
  c.omega_axis = axis(grid, "grid", "omega", AxisSpec{linspace(0.1, 1.5, 15)});

  const json sweep = doc.contains("sweep") ? doc["sweep"] : json::object();
  check_keys(sweep, "sweep", {"rate"});
  c.sweep_rate = number(sweep, "sweep", "rate", 5e-4);
  if (!(c.sweep_rate > 0.0)) throw ConfigError("'sweep.rate' must be positive");

  const json scan = doc.contains("scan") ? doc["scan"] : json::object();
  check_keys(scan, "scan", {"delta_lo", "delta_hi", "rate", "window_periods", "samples_per_period"});
  c.scan_delta_lo = number(scan, "scan", "delta_lo", 2.5);
  c.scan_delta_hi = number(scan, "scan", "delta_hi", 4.5);
  c.scan_rate = number(scan, "scan", "rate", 2e-4);
  c.window_periods = count(scan, "scan", "window_periods", 8);
  c.samples_per_period = number(scan, "scan", "samples_per_period", 200.0);
  if (!(c.scan_delta_hi > c.scan_delta_lo)) throw ConfigError("'scan.delta_hi' must exceed 'scan.delta_lo'");
  if (!(c.scan_rate > 0.0)) throw ConfigError("'scan.rate' must be positive");
  if (c.window_periods < 2) throw ConfigError("'scan.window_periods' must be at least 2");
  if (!(c.samples_per_period >= 4.0)) throw ConfigError("'scan.samples_per_period' must be at least 4");

  const json an = doc.contains("analysis") ? doc["analysis"] : json::object();
  check_keys(an, "analysis", {"transient_periods", "analysis_periods", "window", "band_fraction"});
  c.analysis.transient_periods = count(an, "analysis", "transient_periods", 10);
  c.analysis.analysis_periods = count(an, "analysis", "analysis_periods", 32);
  c.analysis.band_fraction = number(an, "analysis", "band_fraction", kDefaultBandFraction);
  try {
    c.analysis.window = window_from_string(text(an, "analysis", "window", "hann"));
  } catch (const ValidationError& e) {
    throw ConfigError(std::string(e.what()) + " in 'analysis.window'");
  }
  if (c.analysis.analysis_periods < kMinStroboscopicPeriods + 1)
    throw ConfigError("'analysis.analysis_periods' must be at least 11");

  const json cal = doc.contains("calibrate") ? doc["calibrate"] : json::object();
  check_keys(cal, "calibrate", {"amp_lo", "amp_hi", "n_steps"});
  c.amp_lo = number(cal, "calibrate", "amp_lo", -10.0);
  c.amp_hi = number(cal, "calibrate", "amp_hi", -1.0);
  c.amp_steps = count(cal, "calibrate", "n_steps", 37);
  if (c.amp_steps == 0) throw ConfigError("'calibrate.n_steps' must be positive");

  const json orc = doc.contains("oracle") ? doc["oracle"] : json::object();
  check_keys(orc, "oracle", {"draws"});
  c.oracle_draws = count(orc, "oracle", "draws", 20);

  // protocol requirements
  const bool needs_drive = protocol == Protocol::scan || protocol == Protocol::mod_map ||
                           protocol == Protocol::fourier_map || protocol == Protocol::calibrate_kick;
  if (needs_drive && !c.drive) throw ConfigError("missing required field 'drive' for protocol " + to_string(protocol));
  if ((protocol == Protocol::fixed_points || protocol == Protocol::basin) &&
      c.params.omega == 0.0)
    throw ConfigError("'params.omega' must be positive for protocol " + to_string(protocol));
  if (protocol == Protocol::hysteresis || protocol == Protocol::fourier_map || protocol == Protocol::bistability_map) {
    for (std::size_t i = 1; i < c.delta_axis.values.size(); ++i)
      if (!(c.delta_axis.values[i] > c.delta_axis.values[i - 1]))
        throw ConfigError("'grid.delta' must be strictly ascending");
    if (protocol != Protocol::bistability_map && c.delta_axis.values.size() < 2)
      throw ConfigError("'grid.delta' needs at least 2 values");
  }
  if (protocol == Protocol::mod_map && c.omega_axis.values.size() < 2)
    throw ConfigError("'grid.omega' needs at least 2 values");

  c.source = doc;
  return c;
}

inline RunConfig parse_config(const std::string& text, Protocol protocol, const FlagOverrides& flags = {}) {
  nlohmann::json doc;
  try {
    doc = text.empty() ? nlohmann::json::object() : nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc, protocol, flags);
}

inline RunConfig parse_config(const char* text, Protocol protocol, const FlagOverrides& flags = {}) {
  return parse_config(std::string(text), protocol, flags);
}

}  // namespace rydmf

#pragma once

// Protocol dispatch for the command-line front end. Each run writes
// result.csv (plus protocol-specific companion CSVs) and manifest.json into
// the output directory. Data files depend only on the configuration.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "rydmf/config.hpp"
#include "rydmf/dynamics.hpp"
#include "rydmf/io.hpp"
#include "rydmf/kick_calibration.hpp"
#include "rydmf/lindblad.hpp"
#include "rydmf/protocols.hpp"
#include "rydmf/spectral.hpp"

namespace rydmf {

inline constexpr const char* kVersion = "1.0.0";

/// Portable uniform draw in [lo, hi) from a 64-bit engine.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

struct OracleDraw {
  SystemParams params;
  DriveWaveform drive;
  BlochState initial;
  double sup_norm = 0.0;
};

/// Random noninteracting parameter/drive/initial-state draws compared
/// between the mean-field integrator and the exact Lindblad evolution.
inline std::vector<OracleDraw> oracle_check(std::size_t draws, std::uint64_t seed, double t1 = 200.0,
                                            double dt_out = 0.25, double gamma = 1.0) {
  std::mt19937_64 rng(seed);
  std::vector<OracleDraw> out(draws);
  for (auto& d : out) {
    d.params = {uniform(rng, 0.05, 2.0), uniform(rng, -5.0, 5.0), 0.0, gamma};
    d.drive.period = uniform(rng, 10.0, 60.0);
    d.drive.duration = uniform(rng, 0.2, 0.2 * d.drive.period);
    d.drive.amplitude = uniform(rng, -10.0, 10.0);
    d.drive.shape = rng() % 2 == 0 ? KickShape::square : KickShape::exponential;
    d.drive.t_offset = uniform(rng, 0.0, d.drive.period);
    // Uniform point in the Bloch ball.
    double x, y, z;
    do {
      x = uniform(rng, -1.0, 1.0);
      y = uniform(rng, -1.0, 1.0);
      z = uniform(rng, -1.0, 1.0);
    } while (x * x + y * y + z * z > 1.0);
    d.initial = {x, y, 0.5 * (z + 1.0)};
  }
  parallel_for(out.size(), [&](std::size_t i) {
    auto& d = out[i];
    const auto mf = integrate(d.initial, d.params, d.drive, 0.0, t1, dt_out);
    const auto ex = evolve_exact(DensityMatrix2::from_bloch(d.initial), d.params, d.drive, 0.0, t1, dt_out);
    d.sup_norm = sup_norm_deviation(ex, mf);
  });
  return out;
}

namespace detail {

inline nlohmann::json to_json(const SystemParams& p) {
  return {{"omega", p.omega}, {"delta0", p.delta0}, {"vbar", p.vbar}, {"gamma", p.gamma}};
}

inline nlohmann::json to_json(const DriveWaveform& d) {
  return {{"period", d.period},
          {"kick_amplitude", d.amplitude},
          {"kick_duration", d.duration},
          {"shape", to_string(d.shape)},
          {"t_offset", d.t_offset}};
}

inline nlohmann::json to_json(const FixedPoint& f) {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : f.eigenvalues) ev.push_back({e.real(), e.imag()});
  return {{"sigma_x", f.state.sigma_x},
          {"sigma_y", f.state.sigma_y},
          {"n_r", f.state.n_r},
          {"stability", to_string(f.stability)},
          {"eigenvalues", ev}};
}

inline BlochState initial_state(const RunConfig& c) {
  switch (c.initial.kind) {
    case InitialCondition::Kind::low: return low_state(c.params);
    case InitialCondition::Kind::high: return high_state(c.params);
    case InitialCondition::Kind::ground: return {};
    case InitialCondition::Kind::explicit_state: return c.initial.state;
  }
  return {};
}

}  // namespace detail

struct RunOutcome {
  int exit_code = 0;
  nlohmann::json manifest;
  std::vector<std::string> files;
};

/// Executes the configured protocol and writes its artifacts into out_dir.
inline RunOutcome run(const RunConfig& c, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  RunOutcome outcome;
  nlohmann::json derived = nlohmann::json::object();
  const auto started = std::chrono::steady_clock::now();
  const auto write = [&](const std::string& name, const io::Table& t) {
    io::write_csv_file((out_dir / name).string(), t);
    outcome.files.push_back(name);
  };
  const SystemParams& p = c.params;

  switch (c.protocol) {
    case Protocol::integrate: {
      const auto ts = integrate(detail::initial_state(c), p, c.drive, c.t0, c.t1, c.dt_out);
      write("result.csv", io::to_table(ts));
      derived["samples"] = ts.size();
      if (c.drive && c.t0 == 0.0 && c.drive->t_offset == 0.0 &&
          c.t1 >= static_cast<double>(c.analysis.transient_periods + c.analysis.analysis_periods) * c.drive->period) {
        const auto a = analyze_response(ts, c.drive->period, channels::kTransmission, c.analysis);
        derived["dtc_order"] = a.report.dtc_order;
        derived["power_f"] = a.report.power_f;
        derived["power_half"] = a.report.power_half;
        derived["alternation_score"] = a.alternation;
      }
      break;
    }
    case Protocol::fixed_points: {
      const auto fps = fixed_points(p);
      write("result.csv", io::to_table(fps));
      nlohmann::json list = nlohmann::json::array();
      for (const auto& f : fps) list.push_back(detail::to_json(f));
      derived["fixed_points"] = list;
      derived["stable_count"] = stable_count(p);
      derived["bistable"] = is_bistable(p);
      break;
    }
    case Protocol::basin: {
      const auto m = basin_map(p, c.plane, c.basin_grid);
      write("result.csv", io::to_table(m));
      write("fixed_points.csv", io::to_table(m.fixed_points));
      std::map<int, std::size_t> counts;
      for (int l : m.labels) ++counts[l];
      nlohmann::json lc = nlohmann::json::object();
      for (const auto& [l, n] : counts) lc[std::to_string(l)] = n;
      derived["label_counts"] = lc;
      derived["fixed_value"] = *m.plane.fixed_value;
      break;
    }
    case Protocol::hysteresis: {
      const auto s = hysteresis_sweep(p, c.delta_axis.values, c.sweep_rate);
      write("result.csv", io::to_table(s));
      derived["max_abs_difference"] = s.max_abs_difference();
      break;
    }
    case Protocol::scan: {
      ScanOptions so{c.scan_rate, c.samples_per_period};
      const auto ts = scanned_spectrum(p, *c.drive, c.scan_delta_lo, c.scan_delta_hi, so);
      write("result.csv", io::to_table(ts));
      const auto prof = local_profile(ts, c.drive->period, c.window_periods);
      write("profile.csv", io::to_table(prof));
      double peak = 0.0;
      for (double v : prof.dtc_order) peak = std::max(peak, v);
      derived["max_local_dtc_order"] = peak;
      break;
    }
    case Protocol::mod_map: {
      ScanOptions so{c.scan_rate, c.samples_per_period};
      const auto m = modulation_phase_map(c.omega_axis.values, p, *c.drive, c.scan_delta_lo, c.scan_delta_hi, so,
                                          c.window_periods);
      write("result.csv", io::to_table(std::vector<const PhaseMap*>{&m.dtc_order, &m.power_f, &m.power_half}));
      nlohmann::json errs = nlohmann::json::array();
      for (std::size_t r = 0; r < m.row_errors.size(); ++r)
        if (m.row_errors[r]) errs.push_back({{"omega", c.omega_axis.values[r]}, {"error", *m.row_errors[r]}});
      derived["row_errors"] = errs;
      break;
    }
    case Protocol::bistability_map: {
      const auto m = bistability_map(c.omega_axis.values, c.delta_axis.values, p, c.sweep_rate);
      write("result.csv", io::to_table(std::vector<const PhaseMap*>{&m.sweep_difference, &m.stable_count}));
      std::size_t violations = 0;
      double max_diff = 0.0;
      for (std::size_t i = 0; i < m.sweep_difference.values.size(); ++i) {
        max_diff = std::max(max_diff, m.sweep_difference.values[i]);
        if (m.sweep_difference.values[i] > 0.05 && m.stable_count.values[i] < 2.0) ++violations;
      }
      derived["max_sweep_difference"] = max_diff;
      derived["containment_violations"] = violations;
      break;
    }
    case Protocol::fourier_map: {
      DrivenRunOptions o;
      o.window = c.analysis;
      o.samples_per_period = c.samples_per_period;
      const auto m = detuning_fourier_map(c.delta_axis.values, p, *c.drive, o);
      write("result.csv", io::to_table(m.spectrum));
      io::Table summary;
      summary.columns = {"detuning", "dtc_order", "power_f", "power_half", "alternation"};
      for (std::size_t i = 0; i < m.dtc_order.size(); ++i)
        summary.add_row({io::format_double(c.delta_axis.values[i]), io::format_double(m.dtc_order[i]),
                         io::format_double(m.power_f[i]), io::format_double(m.power_half[i]),
                         io::format_double(m.alternation[i])});
      write("summary.csv", summary);
      derived["critical_detuning"] = m.critical_detuning ? nlohmann::json(*m.critical_detuning) : nlohmann::json();
      break;
    }
    case Protocol::calibrate_kick: {
      DrivenRunOptions o;
      o.window = c.analysis;
      o.samples_per_period = c.samples_per_period;
      if (c.initial.kind == InitialCondition::Kind::high) o.start = StartBranch::high;
      const auto scan = calibrate_kick(p, *c.drive, c.amp_lo, c.amp_hi, c.amp_steps, o);
      write("result.csv", io::to_table(scan));
      nlohmann::json windows = nlohmann::json::array();
      for (const auto& w : dtc_windows(scan)) windows.push_back({w.lo, w.hi});
      derived["dtc_windows"] = windows;
      const auto amp = calibrated_amplitude(scan);
      derived["calibrated_amplitude"] = amp ? nlohmann::json(*amp) : nlohmann::json();
      break;
    }
    case Protocol::oracle_check: {
      const auto draws = oracle_check(c.oracle_draws, c.seed, c.t1, c.dt_out, p.gamma);
      io::Table t;
      t.columns = {"draw", "omega", "delta0", "period", "kick_amplitude", "kick_duration", "shape", "sup_norm"};
      double worst = 0.0;
      for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& d = draws[i];
        worst = std::max(worst, d.sup_norm);
        t.add_row({std::to_string(i), io::format_double(d.params.omega), io::format_double(d.params.delta0),
                   io::format_double(d.drive.period), io::format_double(d.drive.amplitude),
                   io::format_double(d.drive.duration), to_string(d.drive.shape), io::format_double(d.sup_norm)});
      }
      write("result.csv", t);
      derived["max_sup_norm"] = worst;
      derived["passes_1e-7"] = worst < 1e-7;
      break;
    }
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  nlohmann::json resolved{{"params", detail::to_json(p)}, {"seed", c.seed}};
  if (c.drive) resolved["drive"] = detail::to_json(*c.drive);
  outcome.manifest = {{"tool", "rydmf"},
                      {"version", kVersion},
                      {"protocol", to_string(c.protocol)},
                      {"config", c.source},
                      {"resolved", resolved},
                      {"derived", derived},
                      {"outputs", outcome.files},
                      {"timings", {{"compute_seconds", elapsed}}}};
  std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
  mf << outcome.manifest.dump(2) << '\n';
  return outcome;
}

}  // namespace rydmf

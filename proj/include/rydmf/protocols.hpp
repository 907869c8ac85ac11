#pragma once

// Composite experiments: detuning sweeps in both directions, scanned
// spectra under the periodic kick, and the associated phase maps.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rydmf/dynamics.hpp"
#include "rydmf/kick_calibration.hpp"
#include "rydmf/parallel.hpp"
#include "rydmf/spectral.hpp"

namespace rydmf {

/// Default detuning ramp rate (gamma^2). Slow enough that a monostable
/// branch is tracked to better than 1e-3 in n_r.
inline constexpr double kDefaultSweepRate = 5e-4;
/// Settling time at the first endpoint before a ramp starts.
inline constexpr double kSweepSettleTime = 20.0;
inline constexpr double kCriticalOrder = 0.5;

struct SweepResult {
  std::vector<double> detuning;
  std::vector<double> forward;   ///< n_r while ramping up
  std::vector<double> backward;  ///< n_r while ramping down
  std::vector<double> difference;  ///< forward - backward

  double max_abs_difference() const {
    double m = 0.0;
    for (double d : difference) m = std::max(m, std::abs(d));
    return m;
  }
};

struct PhaseMap {
  std::string x_label, y_label, semantics;
  std::vector<double> x;
  std::vector<double> y;
  /// values[iy * x.size() + ix]
  std::vector<double> values;

  PhaseMap() = default;
  PhaseMap(std::string xl, std::vector<double> xs, std::string yl, std::vector<double> ys, std::string sem)
      : x_label(std::move(xl)), y_label(std::move(yl)), semantics(std::move(sem)), x(std::move(xs)),
        y(std::move(ys)), values(x.size() * y.size(), 0.0) {}

  double& at(std::size_t ix, std::size_t iy) { return values[iy * x.size() + ix]; }
  double at(std::size_t ix, std::size_t iy) const { return values[iy * x.size() + ix]; }
};

namespace detail {

inline void require_ascending(const std::vector<double>& axis, const char* what) {
  if (axis.size() < 2) throw ValidationError(std::string(what) + " needs at least 2 points");
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (!(axis[i] > axis[i - 1])) throw ValidationError(std::string(what) + " must be strictly ascending");
}

/// Stable state with the lowest population at detuning delta, settled for
/// kSweepSettleTime without drive.
inline BlochState settled_start(SystemParams p, double delta) {
  p.delta0 = delta;
  const BlochState s = low_state(p);
  return evolve(s, p, DetuningSchedule{}, 0.0, kSweepSettleTime);
}

}  // namespace detail

/// Ramps Delta0 from the first to the last axis value and back at `rate`,
/// with no periodic drive, recording n_r at each axis detuning.
inline SweepResult hysteresis_sweep(const SystemParams& p_base, const std::vector<double>& detuning_axis,
                                    double rate = kDefaultSweepRate) {
  validate_params(p_base);
  detail::require_ascending(detuning_axis, "detuning axis");
  if (!(rate > 0.0)) throw ValidationError("sweep rate must be positive");
  const double lo = detuning_axis.front(), hi = detuning_axis.back();
  const double duration = (hi - lo) / rate;
  const std::size_t n = detuning_axis.size();

  SweepResult out;
  out.detuning = detuning_axis;
  out.forward.resize(n);
  out.backward.resize(n);
  out.difference.resize(n);

  for (int direction : {+1, -1}) {
    SystemParams p = p_base;
    p.delta0 = direction > 0 ? lo : hi;
    const BlochState s0 = detail::settled_start(p_base, p.delta0);
    DetuningSchedule sched;
    sched.ramp_rate = direction * rate;
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = direction > 0 ? detuning_axis[i] : detuning_axis[n - 1 - i];
      times[i] = std::min(duration, std::abs(d - p.delta0) / rate);
    }
    const auto states = sample_trajectory(s0, p, sched, 0.0, duration, times);
    for (std::size_t i = 0; i < n; ++i) {
      if (direction > 0)
        out.forward[i] = states[i].n_r;
      else
        out.backward[n - 1 - i] = states[i].n_r;
    }
  }
  for (std::size_t i = 0; i < n; ++i) out.difference[i] = out.forward[i] - out.backward[i];
  return out;
}

inline std::vector<double> uniform_axis(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw ValidationError("axis needs hi > lo and at least 2 points");
  return linspace(lo, hi, n);
}

struct ScanOptions {
  double rate = 2e-4;
  double samples_per_period = 200.0;
};

/// Single upward detuning ramp over [delta_lo, delta_hi] with the periodic
/// drive active; the first kick coincides with the start of the ramp.
inline TimeSeries scanned_spectrum(const SystemParams& p_base, DriveWaveform drive, double delta_lo,
                                   double delta_hi, const ScanOptions& opt = {}) {
  validate_params(p_base);
  drive.t_offset = 0.0;
  validate_drive(drive);
  if (!(delta_hi > delta_lo)) throw ValidationError("delta_hi must exceed delta_lo");
  if (!(opt.rate > 0.0)) throw ValidationError("scan rate must be positive");
  SystemParams p = p_base;
  p.delta0 = delta_lo;
  const BlochState s0 = detail::settled_start(p_base, delta_lo);
  DetuningSchedule sched;
  sched.ramp_rate = opt.rate;
  sched.drive = drive;
  return integrate_schedule(s0, p, sched, 0.0, (delta_hi - delta_lo) / opt.rate,
                            drive.period / opt.samples_per_period);
}

inline constexpr std::size_t kDefaultLocalWindowPeriods = 8;

struct LocalProfile {
  std::vector<double> detuning;  ///< window-centre detuning
  std::vector<double> power_f;
  std::vector<double> power_half;
  std::vector<double> dtc_order;
};

/// Non-overlapping windows of `window_periods` drive periods along a scan,
/// each analysed for its f and f/2 band powers.
inline LocalProfile local_profile(const TimeSeries& scan, double period,
                                  std::size_t window_periods = kDefaultLocalWindowPeriods,
                                  const std::string& channel = channels::kTransmission) {
  if (window_periods < 2) throw ValidationError("local window needs at least 2 periods");
  const auto per = static_cast<std::size_t>(std::llround(period / scan.dt()));
  const std::size_t len = per * window_periods;
  const auto& det = scan.channel(channels::kDetuning);
  LocalProfile out;
  for (std::size_t first = 0; first + len <= scan.size(); first += len) {
    const auto w = scan.slice(first, len);
    const auto r = mark_drive(fft_spectrum(w, channel, Window::hann), 1.0 / period);
    out.detuning.push_back(0.5 * (det[first] + det[first + len - 1]));
    out.power_f.push_back(r.power_f);
    out.power_half.push_back(r.power_half);
    out.dtc_order.push_back(r.dtc_order);
  }
  return out;
}

struct ModulationMap {
  PhaseMap dtc_order;
  PhaseMap power_f;
  PhaseMap power_half;
  std::vector<std::optional<std::string>> row_errors;
};

/// One scanned spectrum per Omega; cells hold window-local dtc_order.
inline ModulationMap modulation_phase_map(const std::vector<double>& omega_values, const SystemParams& p_base,
                                          const DriveWaveform& drive, double delta_lo, double delta_hi,
                                          const ScanOptions& opt = {},
                                          std::size_t window_periods = kDefaultLocalWindowPeriods,
                                          unsigned threads = 0) {
  if (omega_values.size() < 2) throw ValidationError("modulation map needs at least 2 omega values");
  const std::size_t rows = omega_values.size();
  std::vector<LocalProfile> profiles(rows);
  std::vector<std::optional<std::string>> errors(rows);
  parallel_for(
      rows,
      [&](std::size_t r) {
        SystemParams p = p_base;
        p.omega = omega_values[r];
        try {
          profiles[r] = local_profile(scanned_spectrum(p, drive, delta_lo, delta_hi, opt), drive.period,
                                      window_periods);
        } catch (const std::exception& e) {
          errors[r] = e.what();
        }
      },
      threads);
  std::vector<double> x;
  for (const auto& pr : profiles)
    if (!pr.detuning.empty()) {
      x = pr.detuning;
      break;
    }
  ModulationMap m{PhaseMap("detuning", x, "omega", omega_values, "dtc_order"),
                  PhaseMap("detuning", x, "omega", omega_values, "power_f"),
                  PhaseMap("detuning", x, "omega", omega_values, "power_half"), errors};
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < x.size(); ++c) {
      const bool ok = !errors[r] && c < profiles[r].detuning.size();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      m.dtc_order.at(c, r) = ok ? profiles[r].dtc_order[c] : nan;
      m.power_f.at(c, r) = ok ? profiles[r].power_f[c] : nan;
      m.power_half.at(c, r) = ok ? profiles[r].power_half[c] : nan;
    }
  }
  return m;
}

struct BistabilityMap {
  PhaseMap sweep_difference;  ///< |forward - backward|
  PhaseMap stable_count;      ///< static stable fixed points per cell
};

inline BistabilityMap bistability_map(const std::vector<double>& omega_values, const std::vector<double>& delta_values,
                                      const SystemParams& p_base, double rate = kDefaultSweepRate,
                                      unsigned threads = 0) {
  if (omega_values.empty() || delta_values.empty()) throw ValidationError("bistability map grids must be nonempty");
  BistabilityMap m{PhaseMap("detuning", delta_values, "omega", omega_values, "sweep_difference"),
                   PhaseMap("detuning", delta_values, "omega", omega_values, "stable_count")};
  parallel_for(
      omega_values.size(),
      [&](std::size_t r) {
        SystemParams p = p_base;
        p.omega = omega_values[r];
        if (delta_values.size() >= 2) {
          const auto sweep = hysteresis_sweep(p, delta_values, rate);
          for (std::size_t c = 0; c < delta_values.size(); ++c)
            m.sweep_difference.at(c, r) = std::abs(sweep.difference[c]);
        }
        for (std::size_t c = 0; c < delta_values.size(); ++c) {
          SystemParams q = p;
          q.delta0 = delta_values[c];
          m.stable_count.at(c, r) = static_cast<double>(stable_count(q));
        }
      },
      threads);
  return m;
}

struct FourierMap {
  PhaseMap spectrum;  ///< power, x = detuning, y = frequency
  std::vector<double> dtc_order;
  std::vector<double> power_f;
  std::vector<double> power_half;
  std::vector<double> alternation;
  /// Smallest detuning whose dtc_order exceeds kCriticalOrder.
  std::optional<double> critical_detuning;
};

/// One locked-detuning driven run per value, started from rho^L.
inline FourierMap detuning_fourier_map(const std::vector<double>& delta_values, const SystemParams& p,
                                       const DriveWaveform& drive, const DrivenRunOptions& opt = {},
                                       unsigned threads = 0) {
  detail::require_ascending(delta_values, "detuning values");
  const std::size_t n = delta_values.size();
  std::vector<ResponseAnalysis> runs(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        SystemParams q = p;
        q.delta0 = delta_values[i];
        runs[i] = driven_response(q, drive, opt);
      },
      threads);
  FourierMap m;
  m.spectrum = PhaseMap("detuning", delta_values, "frequency", runs.front().report.spectrum.frequency, "power");
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = runs[i].report;
    for (std::size_t k = 0; k < r.spectrum.power.size(); ++k) m.spectrum.at(i, k) = r.spectrum.power[k];
    m.dtc_order.push_back(r.dtc_order);
    m.power_f.push_back(r.power_f);
    m.power_half.push_back(r.power_half);
    m.alternation.push_back(runs[i].alternation);
    if (!m.critical_detuning && r.dtc_order > kCriticalOrder) m.critical_detuning = delta_values[i];
  }
  return m;
}

}  // namespace rydmf

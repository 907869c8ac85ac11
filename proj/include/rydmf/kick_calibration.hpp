#pragma once

// Scans the kick amplitude of a template drive and reports the resulting
// subharmonic order parameter, so callers can locate period-doubling windows.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rydmf/dynamics.hpp"
#include "rydmf/spectral.hpp"

namespace rydmf {

enum class StartBranch { low, high };

struct DrivenRunOptions {
  ResponseWindow window{};
  double samples_per_period = 200.0;
  StartBranch start = StartBranch::low;
  std::string channel = channels::kTransmission;
};

/// Integrates transient + analysis periods from rho^L (or rho^H) of `p`
/// with the drive's onset at t = 0, then analyses the steady window.
inline ResponseAnalysis driven_response(const SystemParams& p, DriveWaveform drive,
                                        const DrivenRunOptions& opt = {}) {
  validate_params(p);
  drive.t_offset = 0.0;
  validate_drive(drive);
  const BlochState s0 = opt.start == StartBranch::low ? low_state(p) : high_state(p);
  const double periods = static_cast<double>(opt.window.transient_periods + opt.window.analysis_periods);
  const double dt = drive.period / opt.samples_per_period;
  const auto ts = integrate(s0, p, drive, 0.0, periods * drive.period, dt);
  return analyze_response(ts, drive.period, opt.channel, opt.window);
}

struct KickScanPoint {
  double amplitude = 0.0;
  double dtc_order = std::numeric_limits<double>::quiet_NaN();
  double alternation = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::string> error;
};

/// n_steps amplitudes evenly spaced over [amp_lo, amp_hi] (inclusive).
/// Monostable parameters are accepted; both start branches then coincide.
inline std::vector<KickScanPoint> calibrate_kick(const SystemParams& p, const DriveWaveform& templ, double amp_lo,
                                                 double amp_hi, std::size_t n_steps,
                                                 const DrivenRunOptions& opt = {}, unsigned threads = 0) {
  validate_params(p);
  validate_drive(templ);
  if (n_steps < 1) throw ValidationError("n_steps must be positive");
  std::vector<KickScanPoint> scan(n_steps);
  parallel_for(
      n_steps,
      [&](std::size_t i) {
        KickScanPoint& pt = scan[i];
        pt.amplitude = linspace_at(amp_lo, amp_hi, n_steps, i);
        DriveWaveform d = templ;
        d.amplitude = pt.amplitude;
        try {
          const auto r = driven_response(p, d, opt);
          pt.dtc_order = r.report.dtc_order;
          pt.alternation = r.alternation;
        } catch (const ode::IntegrationError& e) {
          pt.error = e.what();
        }
      },
      threads);
  return scan;
}

/// Contiguous runs of scan points with dtc_order above `threshold`.
struct AmplitudeWindow {
  double lo, hi;
  std::size_t first, count;
};

inline std::vector<AmplitudeWindow> dtc_windows(const std::vector<KickScanPoint>& scan, double threshold = 0.5) {
  std::vector<AmplitudeWindow> out;
  for (std::size_t i = 0; i < scan.size();) {
    if (!(scan[i].dtc_order > threshold)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < scan.size() && scan[j + 1].dtc_order > threshold) ++j;
    out.push_back({scan[i].amplitude, scan[j].amplitude, i, j - i + 1});
    i = j + 1;
  }
  return out;
}

/// Middle point of the widest window (earliest on ties), if any.
inline std::optional<double> calibrated_amplitude(const std::vector<KickScanPoint>& scan, double threshold = 0.5) {
  const auto windows = dtc_windows(scan, threshold);
  if (windows.empty()) return std::nullopt;
  const AmplitudeWindow* best = &windows.front();
  for (const auto& w : windows)
    if (w.count > best->count) best = &w;
  return scan[best->first + (best->count - 1) / 2].amplitude;
}

}  // namespace rydmf

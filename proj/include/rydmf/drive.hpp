#pragma once

// Periodic detuning kicks imposed by trapped charges, and the linear
// magnetic-field-to-modulation-frequency map.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rydmf/core.hpp"

namespace rydmf {

enum class KickShape { square, exponential };

inline std::string to_string(KickShape s) { return s == KickShape::square ? "square" : "exponential"; }

inline KickShape kick_shape_from_string(const std::string& s) {
  if (s == "square") return KickShape::square;
  if (s == "exponential") return KickShape::exponential;
  throw ValidationError("unknown kick shape '" + s + "'");
}

/// A T-periodic detuning waveform. Square kicks hold `amplitude` for
/// `duration` after every onset; exponential kicks decay as
/// amplitude * exp(-t'/duration), t' being the time since the last onset.
/// Onsets sit at t_offset + k * period.
struct DriveWaveform {
  double period = 50.0;
  double amplitude = 0.0;
  double duration = 2.0;
  KickShape shape = KickShape::square;
  double t_offset = 0.0;

  friend bool operator==(const DriveWaveform&, const DriveWaveform&) = default;

  /// Time since the most recent kick onset, in [0, period).
  double phase(double t) const {
    double ph = std::fmod(t - t_offset, period);
    if (ph < 0.0) ph += period;
    if (ph >= period) ph = 0.0;
    return ph;
  }

  /// Onset of the kick whose period contains t.
  double onset_before(double t) const {
    return t_offset + std::floor((t - t_offset) / period) * period;
  }

  double eval(double t) const { return value_at_phase(phase(t)); }

  /// The kick is short against the relaxation time and the free evolution long.
  bool satisfies_timescale_ordering() const { return duration <= period / 5.0; }

  /// A smooth representation of the waveform on a segment that contains no
  /// edge, anchored at the kick onset governing the segment midpoint.
  std::function<double(double)> on_segment(double t_lo, double t_hi) const {
    const double mid = 0.5 * (t_lo + t_hi);
    if (shape == KickShape::square) {
      const double v = eval(mid);
      return [v](double) { return v; };
    }
    const double onset = onset_before(mid);
    return [a = amplitude, tau = duration, onset](double t) { return a * std::exp(-(t - onset) / tau); };
  }

  /// Discontinuities of the waveform inside [t0, t1].
  std::vector<double> edges(double t0, double t1) const {
    std::vector<double> out;
    if (amplitude == 0.0) return out;
    for (double on = onset_before(t0); on <= t1; on += period) {
      if (on >= t0) out.push_back(on);
      if (shape == KickShape::square && on + duration >= t0 && on + duration <= t1)
        out.push_back(on + duration);
    }
    return out;
  }

 private:
  double value_at_phase(double ph) const {
    if (shape == KickShape::square) return ph < duration ? amplitude : 0.0;
    return amplitude * std::exp(-ph / duration);
  }
};

inline DriveWaveform validate_drive(const DriveWaveform& d) {
  if (!std::isfinite(d.period) || !(d.period > 0.0)) throw ValidationError("drive period must be positive");
  if (!std::isfinite(d.duration) || !(d.duration > 0.0))
    throw ValidationError("kick duration must be positive");
  if (d.shape == KickShape::square && !(d.duration < d.period))
    throw ValidationError("kick duration must be shorter than the period");
  if (!std::isfinite(d.amplitude)) throw ValidationError("kick amplitude must be finite");
  if (!std::isfinite(d.t_offset)) throw ValidationError("drive t_offset must be finite");
  return d;
}

/// Default kick: square, T = 50/gamma, tau = 2/gamma.
inline DriveWaveform default_drive(double amplitude = 0.0) { return DriveWaveform{50.0, amplitude, 2.0}; }

/// f = kappa * B through the origin; kappa in Hz per Gauss.
struct FieldToFrequencyMap {
  double kappa = 0.0;

  /// Slope from a single measured point (B, f).
  static FieldToFrequencyMap from_point(double b_gauss, double f_hz) {
    if (!(b_gauss > 0.0) || !(f_hz > 0.0)) throw ValidationError("calibration point must be positive");
    return {f_hz / b_gauss};
  }
};

/// Least-squares slope of f = kappa * B with zero intercept.
inline FieldToFrequencyMap fit_through_origin(std::span<const double> b_gauss, std::span<const double> f_hz) {
  if (b_gauss.size() != f_hz.size() || b_gauss.empty())
    throw ValidationError("fit needs equal-length nonempty samples");
  double sbf = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < b_gauss.size(); ++i) {
    sbf += b_gauss[i] * f_hz[i];
    sbb += b_gauss[i] * b_gauss[i];
  }
  if (!(sbb > 0.0)) throw ValidationError("fit needs a nonzero field");
  return {sbf / sbb};
}

struct DriveTiming {
  double frequency_hz;
  double period_s;
};

inline DriveTiming period_from_bfield(double b_gauss, const FieldToFrequencyMap& m) {
  if (!(m.kappa > 0.0) || !std::isfinite(m.kappa)) throw ValidationError("kappa must be positive");
  if (!(b_gauss > 0.0) || !std::isfinite(b_gauss)) throw ValidationError("magnetic field must be positive");
  const double f = m.kappa * b_gauss;
  return {f, 1.0 / f};
}

/// Drive period in simulation units (1/gamma) given the physical decay rate
/// gamma_phys in 1/s. There is no default rate.
inline double period_in_gamma_units(double period_s, double gamma_phys_per_s) {
  if (!(gamma_phys_per_s > 0.0)) throw ValidationError("gamma_phys must be positive");
  return period_s * gamma_phys_per_s;
}

}  // namespace rydmf

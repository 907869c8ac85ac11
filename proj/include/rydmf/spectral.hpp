#pragma once

// One-sided power spectra of transmission time series, band powers at the
// drive frequency f and the subharmonic f/2, and stroboscopic period-2 tests.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rydmf/core.hpp"

namespace rydmf {

enum class Window { rectangular, hann };

inline std::string to_string(Window w) { return w == Window::rectangular ? "rectangular" : "hann"; }

inline Window window_from_string(const std::string& s) {
  if (s == "rectangular") return Window::rectangular;
  if (s == "hann") return Window::hann;
  throw ValidationError("unknown window '" + s + "'");
}

inline constexpr std::size_t kMinSpectrumSamples = 64;

/// Relative height of the denominator floor used by dtc_order.
inline constexpr double kSpectralFloor = 1e-12;

/// Fluctuations below this fraction of the raw signal magnitude count as silence.
inline constexpr double kSilenceFraction = 1e-9;

struct Spectrum {
  std::size_t n_samples = 0;
  double dt = 1.0;
  double df = 1.0;  ///< 1 / (N dt)
  Window window = Window::hann;
  std::vector<double> frequency;
  /// Sinusoid amplitude estimate per bin (coherent-gain corrected).
  std::vector<double> amplitude;
  /// One-sided power per bin; for the rectangular window it sums to the
  /// mean square of the mean-subtracted signal.
  std::vector<double> power;
  /// max |x| of the raw (pre mean-subtraction) input.
  double raw_scale = 0.0;

  double nyquist() const { return 0.5 / dt; }
  double peak_power() const { return power.empty() ? 0.0 : *std::max_element(power.begin(), power.end()); }
};

namespace detail {

// FFTW planning is not thread-safe; execution is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

inline std::vector<std::complex<double>> real_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> in(x);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace detail

/// Mean-subtracted, windowed one-sided spectrum of a uniformly sampled signal.
inline Spectrum fft_spectrum(std::span<const double> samples, double dt, Window window = Window::hann) {
  const std::size_t n = samples.size();
  if (n < kMinSpectrumSamples)
    throw ValidationError("spectrum needs at least " + std::to_string(kMinSpectrumSamples) + " samples");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  Spectrum s;
  s.n_samples = n;
  s.dt = dt;
  s.df = 1.0 / (static_cast<double>(n) * dt);
  s.window = window;

  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  std::vector<double> x(n);
  double wsum = 0.0, w2sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.raw_scale = std::max(s.raw_scale, std::abs(samples[i]));
    const double w = window == Window::rectangular
                         ? 1.0
                         : 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                 static_cast<double>(n)));
    wsum += w;
    w2sum += w * w;
    x[i] = (samples[i] - mean) * w;
  }
  const auto X = detail::real_dft(x);
  const double nn = static_cast<double>(n);
  const double power_norm = 1.0 / (nn * w2sum);  // = 1/(N^2 mean(w^2))
  s.frequency.resize(X.size());
  s.amplitude.resize(X.size());
  s.power.resize(X.size());
  for (std::size_t k = 0; k < X.size(); ++k) {
    const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
    const double fold = edge ? 1.0 : 2.0;
    const double mag = std::abs(X[k]);
    s.frequency[k] = static_cast<double>(k) * s.df;
    s.power[k] = fold * mag * mag * power_norm;
    s.amplitude[k] = fold * mag / wsum;
  }
  return s;
}

inline Spectrum fft_spectrum(const TimeSeries& ts, const std::string& channel, Window window = Window::hann) {
  return fft_spectrum(ts.channel(channel), ts.dt(), window);
}

struct SpectralReport {
  Spectrum spectrum;
  double f_drive = 0.0;
  double band_halfwidth = 0.0;
  double power_f = 0.0;
  double power_half = 0.0;
  /// Band powers minus the local continuum under each band.
  double line_f = 0.0;
  double line_half = 0.0;
  /// line_half / (line_half + line_f), 0 for silent signals.
  double dtc_order = 0.0;
};

inline constexpr double kDefaultBandFraction = 0.1;

struct Band {
  std::size_t first = 0, last = 0;  ///< inclusive bin range
  double power = 0.0;
};

/// Bins with |f_k - center| <= halfwidth, or the nearest bin if none.
inline Band band_bins(const Spectrum& s, double center, double halfwidth) {
  Band b;
  bool any = false;
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    if (std::abs(s.frequency[k] - center) <= halfwidth) {
      if (!any) b.first = k;
      b.last = k;
      b.power += s.power[k];
      any = true;
    }
  }
  if (!any) {
    const auto k = std::min(static_cast<std::size_t>(std::llround(center / s.df)), s.power.size() - 1);
    b.first = b.last = k;
    b.power = s.power[k];
  }
  return b;
}

inline double band_power(const Spectrum& s, double center, double halfwidth) {
  return band_bins(s, center, halfwidth).power;
}

/// Band power with the continuum removed. The continuum level is the mean
/// of the bins two and three steps outside the band, where the Hann leakage
/// of a bin-centred line vanishes; DC is never used.
inline double line_power(const Spectrum& s, const Band& b) {
  double flank = 0.0;
  std::size_t n = 0;
  for (std::size_t off : {2u, 3u}) {
    if (b.first >= off + 1) {
      flank += s.power[b.first - off];
      ++n;
    }
    if (b.last + off < s.power.size()) {
      flank += s.power[b.last + off];
      ++n;
    }
  }
  const double continuum = n ? flank / static_cast<double>(n) : 0.0;
  return std::max(0.0, b.power - continuum * static_cast<double>(b.last - b.first + 1));
}

/// Band half-width is band_fraction * f_drive / 2 around both f and f/2.
inline SpectralReport mark_drive(Spectrum spectrum, double f_drive, double band_fraction = kDefaultBandFraction) {
  if (!(f_drive > 0.0)) throw ValidationError("drive frequency must be positive");
  if (f_drive >= spectrum.nyquist()) throw ValidationError("drive frequency at or above Nyquist");
  if (f_drive / 2.0 < spectrum.df) throw ValidationError("subharmonic below frequency resolution");
  if (!(band_fraction > 0.0) || band_fraction >= 1.0) throw ValidationError("band fraction must be in (0, 1)");
  SpectralReport r;
  r.f_drive = f_drive;
  r.band_halfwidth = band_fraction * f_drive / 2.0;
  const Band bf = band_bins(spectrum, f_drive, r.band_halfwidth);
  const Band bh = band_bins(spectrum, f_drive / 2.0, r.band_halfwidth);
  r.power_f = bf.power;
  r.power_half = bh.power;
  r.line_f = line_power(spectrum, bf);
  r.line_half = line_power(spectrum, bh);
  const double peak = spectrum.peak_power();
  const double silence = kSilenceFraction * spectrum.raw_scale;
  const double lines = r.line_f + r.line_half;
  const bool silent = peak <= 0.0 || lines <= 0.0 || std::sqrt(lines) <= silence;
  r.dtc_order = silent ? 0.0 : r.line_half / (lines + kSpectralFloor * peak);
  r.spectrum = std::move(spectrum);
  return r;
}

// ---------------------------------------------------------------------------
// Stroboscopic sampling
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMinStroboscopicPeriods = 10;

/// Values of `channel` at t0 + k T, linearly interpolated, for every k with
/// t0 + k T inside the series.
inline std::vector<double> stroboscopic(const TimeSeries& ts, const std::string& channel, double period,
                                        double t0) {
  if (!(period > 0.0)) throw ValidationError("period must be positive");
  const auto& v = ts.channel(channel);
  if (v.size() < 2) throw ValidationError("time series too short");
  const double span = ts.t_end() - ts.t0();
  if (span < static_cast<double>(kMinStroboscopicPeriods) * period * (1.0 - 1e-12))
    throw ValidationError("time series spans fewer than 10 periods");
  double first = t0;
  if (first < ts.t0()) first += std::ceil((ts.t0() - first) / period - 1e-12) * period;
  std::vector<double> out;
  const double eps = 1e-9 * ts.dt();
  for (std::size_t k = 0;; ++k) {
    const double t = first + static_cast<double>(k) * period;
    if (t > ts.t_end() + eps) break;
    const double pos = std::clamp((t - ts.t0()) / ts.dt(), 0.0, static_cast<double>(v.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(std::floor(pos)), v.size() - 2);
    const double frac = pos - static_cast<double>(i);
    out.push_back(v[i] + frac * (v[i + 1] - v[i]));
  }
  return out;
}

/// mean|s[k+1]-s[k]| / (mean|s[k+2]-s[k]| + floor); floor = 1e-6 max|s|.
/// 0 for constant sequences, ~0 for period-T, large for period-2T.
inline double alternation_score(std::span<const double> s) {
  if (s.size() < 3) throw ValidationError("alternation score needs at least 3 samples");
  double d1 = 0.0, d2 = 0.0, scale = 0.0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) d1 += std::abs(s[k + 1] - s[k]);
  for (std::size_t k = 0; k + 2 < s.size(); ++k) d2 += std::abs(s[k + 2] - s[k]);
  for (double x : s) scale = std::max(scale, std::abs(x));
  d1 /= static_cast<double>(s.size() - 1);
  d2 /= static_cast<double>(s.size() - 2);
  if (d1 == 0.0) return 0.0;
  return d1 / (d2 + 1e-6 * scale);
}

/// Even/odd split of a stroboscopic sequence.
struct PeriodTwoClusters {
  double even_mean = 0.0, odd_mean = 0.0;
  double separation = 0.0;  ///< |even_mean - odd_mean|
  double spread = 0.0;      ///< larger of the two within-cluster standard deviations
};

inline PeriodTwoClusters period_two_clusters(std::span<const double> s) {
  if (s.size() < 4) throw ValidationError("cluster test needs at least 4 samples");
  PeriodTwoClusters c;
  double se = 0.0, so = 0.0;
  std::size_t ne = 0, no = 0;
  for (std::size_t k = 0; k < s.size(); ++k) (k % 2 == 0 ? (se += s[k], ++ne) : (so += s[k], ++no));
  c.even_mean = se / static_cast<double>(ne);
  c.odd_mean = so / static_cast<double>(no);
  double ve = 0.0, vo = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double d = s[k] - (k % 2 == 0 ? c.even_mean : c.odd_mean);
    (k % 2 == 0 ? ve : vo) += d * d;
  }
  c.spread = std::sqrt(std::max(ve / static_cast<double>(ne), vo / static_cast<double>(no)));
  c.separation = std::abs(c.even_mean - c.odd_mean);
  return c;
}

// ---------------------------------------------------------------------------
// Steady-window analysis of a driven trajectory
// ---------------------------------------------------------------------------

struct ResponseWindow {
  std::size_t transient_periods = 10;
  std::size_t analysis_periods = 32;
  Window window = Window::hann;
  double band_fraction = kDefaultBandFraction;
};

struct ResponseAnalysis {
  SpectralReport report;
  std::vector<double> strobes;  ///< one per analysed period, sampled just before each kick
  double alternation = 0.0;
  PeriodTwoClusters clusters;
};

/// Analyses `channel` of a trajectory that starts at drive phase zero:
/// discards the transient periods, then computes the spectrum, dtc_order
/// and stroboscopic statistics over the analysis periods.
inline ResponseAnalysis analyze_response(const TimeSeries& ts, double period, const std::string& channel,
                                         const ResponseWindow& w = {}) {
  const double t_start = ts.t0() + static_cast<double>(w.transient_periods) * period;
  const double t_stop = t_start + static_cast<double>(w.analysis_periods) * period;
  if (t_stop > ts.t_end() + 1e-9 * period) throw ValidationError("time series shorter than transient + analysis window");
  const auto first = static_cast<std::size_t>(std::llround((t_start - ts.t0()) / ts.dt()));
  const auto count = static_cast<std::size_t>(std::llround((t_stop - t_start) / ts.dt()));
  const TimeSeries window = ts.slice(first, std::min(count, ts.size() - first));
  ResponseAnalysis a;
  a.report = mark_drive(fft_spectrum(window, channel, w.window), 1.0 / period, w.band_fraction);
  // Strobe at the end of each period, i.e. just before the next kick.
  a.strobes = stroboscopic(window, channel, period, window.t0() + period - window.dt());
  a.alternation = alternation_score(a.strobes);
  a.clusters = period_two_clusters(a.strobes);
  return a;
}

}  // namespace rydmf

#pragma once

// Explicit adaptive Dormand-Prince 5(4) integrator with the Shampine
// continuous extension, for small dense systems held in std::array.
//
// Output samples are produced from the dense interpolant, so the internal
// step sequence never depends on where samples are requested. Integration
// restarts at every breakpoint, which is where callers place discontinuities
// of the right-hand side (drive edges). Within a segment the right-hand side
// is produced by a factory evaluated once per segment, so a piecewise
// function can be presented to the stepper as a smooth one.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rydmf::ode {

struct Options {
  double atol = 1e-9;
  double rtol = 1e-9;
  double h_max = std::numeric_limits<double>::infinity();
  /// Relative step floor; a step smaller than this times max(|t|, 1) fails.
  double h_min_rel = 1e-14;
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t)
      : std::runtime_error(what + " at t=" + std::to_string(t)), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

namespace detail {

// Butcher tableau of Dormand & Prince (1980).
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense output coefficients.
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace detail

/// Integrates y' = f(t, y) from t0 to t1.
///
/// `make_rhs(t_lo, t_hi)` returns the callable `f(t, y, dydt)` valid on the
/// open segment (t_lo, t_hi). `breakpoints` (any order, any values) split the
/// interval; those outside (t0, t1) are ignored. `sample_times` must be
/// ascending and inside [t0, t1]; `observe(index, t, y)` is called once per
/// sample in order. Returns the state at t1.
template <std::size_t N, class RhsFactory, class Observer>
std::array<double, N> integrate(RhsFactory&& make_rhs, std::array<double, N> y, double t0, double t1,
                                std::span<const double> breakpoints,
                                std::span<const double> sample_times, Observer&& observe,
                                const Options& opt = {}, Stats* stats = nullptr) {
  using namespace detail;
  using Vec = std::array<double, N>;
  if (!(t1 >= t0)) throw std::invalid_argument("integrate: t1 must not precede t0");
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    const double s = sample_times[i];
    const double slack = 1e-12 * std::max({1.0, std::abs(t0), std::abs(t1)});
    if (s < t0 - slack || s > t1 + slack || (i > 0 && s < sample_times[i - 1]))
      throw std::invalid_argument("integrate: sample times must be ascending within [t0, t1]");
  }

  std::vector<double> edges;
  edges.push_back(t0);
  for (double b : breakpoints)
    if (b > t0 && b < t1) edges.push_back(b);
  std::sort(edges.begin() + 1, edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges.push_back(t1);

  Stats local;
  Stats& st = stats != nullptr ? *stats : local;
  std::size_t next_sample = 0;
  const auto emit_until = [&](double t_hi, auto&& value_at) {
    while (next_sample < sample_times.size() && sample_times[next_sample] <= t_hi) {
      observe(next_sample, sample_times[next_sample], value_at(sample_times[next_sample]));
      ++next_sample;
    }
  };

  double h = 0.0;  // carried across segments
  for (std::size_t seg = 0; seg + 1 < edges.size(); ++seg) {
    const double ta = edges[seg];
    const double tb = edges[seg + 1];
    if (tb <= ta) {
      emit_until(tb, [&](double) { return y; });
      continue;
    }
    auto f = make_rhs(ta, tb);
    const auto eval = [&](double t, const Vec& x, Vec& dx) {
      f(t, x, dx);
      ++st.rhs_evals;
    };

    Vec k1{}, k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, tmp{}, ynew{};
    double t = ta;
    eval(t, y, k1);

    if (h <= 0.0) {
      // Initial step guess (Hairer, Norsett & Wanner, II.4).
      double d0 = 0.0, d1n = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sk = opt.atol + opt.rtol * std::abs(y[i]);
        d0 += (y[i] / sk) * (y[i] / sk);
        d1n += (k1[i] / sk) * (k1[i] / sk);
      }
      d0 = std::sqrt(d0 / N);
      d1n = std::sqrt(d1n / N);
      h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
      h = std::min(h, tb - ta);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k1[i];
      eval(t + h, tmp, k2);
      double d2 = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sk = opt.atol + opt.rtol * std::abs(y[i]);
        const double v = (k2[i] - k1[i]) / sk;
        d2 += v * v;
      }
      d2 = std::sqrt(d2 / N) / h;
      const double dm = std::max(d1n, d2);
      const double h1 = dm <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
      h = std::min(100.0 * h, h1);
    }

    bool last_rejected = false;
    while (t < tb) {
      h = std::min({h, opt.h_max, tb - t});
      if (h < opt.h_min_rel * std::max(1.0, std::abs(t)))
        throw IntegrationError("step size underflow", t);
      const bool final_step = t + h >= tb;

      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
      eval(t + c2 * h, tmp, k2);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      eval(t + c3 * h, tmp, k3);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      eval(t + c4 * h, tmp, k4);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      eval(t + c5 * h, tmp, k5);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      const double t_new = final_step ? tb : t + h;
      eval(t_new, tmp, k6);
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      eval(t_new, ynew, k7);

      double err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                              e7 * k7[i]);
        const double sk = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err += (e / sk) * (e / sk);
      }
      err = std::sqrt(err / N);
      if (!std::isfinite(err)) {
        h *= 0.2;
        last_rejected = true;
        ++st.rejected;
        continue;
      }

      if (err <= 1.0) {
        ++st.accepted;
        if (next_sample < sample_times.size() && sample_times[next_sample] <= t_new) {
          Vec r1 = y, r2{}, r3{}, r4{}, r5{};
          for (std::size_t i = 0; i < N; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            r2[i] = ydiff;
            r3[i] = bspl;
            r4[i] = ydiff - h * k7[i] - bspl;
            r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
          }
          const double t_old = t;
          const double h_step = h;
          emit_until(t_new, [&](double ts) {
            const double th = std::clamp((ts - t_old) / h_step, 0.0, 1.0);
            const double th1 = 1.0 - th;
            Vec out{};
            for (std::size_t i = 0; i < N; ++i)
              out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
            return out;
          });
        }
        y = ynew;
        k1 = k7;
        t = t_new;
        double fac = err == 0.0 ? 10.0 : 0.9 * std::pow(err, -0.2);
        fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
        h *= fac;
        last_rejected = false;
      } else {
        ++st.rejected;
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        last_rejected = true;
      }
    }
  }
  emit_until(std::numeric_limits<double>::infinity(), [&](double) { return y; });
  return y;
}

/// Convenience overload without sampling.
template <std::size_t N, class RhsFactory>
std::array<double, N> integrate(RhsFactory&& make_rhs, std::array<double, N> y, double t0, double t1,
                                std::span<const double> breakpoints, const Options& opt = {},
                                Stats* stats = nullptr) {
  return integrate<N>(std::forward<RhsFactory>(make_rhs), y, t0, t1, breakpoints,
                      std::span<const double>{}, [](std::size_t, double, const auto&) {}, opt,
                      stats);
}

/// `count` uniformly spaced times t0, t0 + dt, ... not exceeding t1.
inline std::vector<double> uniform_times(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("sample spacing must be positive");
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt * (1.0 + 1e-12))) + 1;
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = std::min(t1, t0 + dt * static_cast<double>(i));
  return ts;
}

}  // namespace rydmf::ode

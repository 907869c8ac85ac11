#pragma once

// Mean-field equations of motion for the driven-dissipative Rydberg gas:
//
//   d sigma_x/dt = [D(t) + Vbar n_r] sigma_y - (gamma/2) sigma_x
//   d sigma_y/dt = 2 Omega (2 n_r - 1) - [D(t) + Vbar n_r] sigma_x - (gamma/2) sigma_y
//   d n_r/dt     = -Omega sigma_y - gamma n_r
//
// with D(t) = Delta0 + delta_c(t). Includes trajectory integration, the
// steady-state cubic, fixed-point stability and basin-of-attraction maps.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

#include "rydmf/core.hpp"
#include "rydmf/drive.hpp"
#include "rydmf/ode.hpp"
#include "rydmf/parallel.hpp"

namespace rydmf {

class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kFixedPointTolerance = 1e-9;
inline constexpr double kAttractTolerance = 1e-4;
inline constexpr double kBasinMaxTime = 200.0;
/// Real parts within this band around zero classify as marginal.
inline constexpr double kMarginalBand = 1e-8;

using State3 = std::array<double, 3>;

inline State3 to_array(const BlochState& s) { return {s.sigma_x, s.sigma_y, s.n_r}; }
inline BlochState to_state(const State3& a) { return {a[0], a[1], a[2]}; }

inline BlochState rhs(const BlochState& s, const SystemParams& p, double delta_c) {
  const double shift = p.delta0 + delta_c + p.vbar * s.n_r;
  return {shift * s.sigma_y - 0.5 * p.gamma * s.sigma_x,
          2.0 * p.omega * (2.0 * s.n_r - 1.0) - shift * s.sigma_x - 0.5 * p.gamma * s.sigma_y,
          -p.omega * s.sigma_y - p.gamma * s.n_r};
}

/// d(rhs)/d(sigma_x, sigma_y, n_r), rows ordered like the state.
inline Eigen::Matrix3d jacobian(const BlochState& s, const SystemParams& p, double delta_c = 0.0) {
  const double shift = p.delta0 + delta_c + p.vbar * s.n_r;
  Eigen::Matrix3d j;
  j << -0.5 * p.gamma, shift, p.vbar * s.sigma_y,
      -shift, -0.5 * p.gamma, 4.0 * p.omega - p.vbar * s.sigma_x,
      0.0, -p.omega, -p.gamma;
  return j;
}

/// Total detuning program D(t) - Delta0 seen by the atoms: an optional
/// linear ramp plus an optional periodic kick.
struct DetuningSchedule {
  double ramp_rate = 0.0;     ///< d Delta / dt
  double ramp_origin = 0.0;   ///< time at which the ramp contributes zero
  std::optional<DriveWaveform> drive;

  double ramp(double t) const { return ramp_rate * (t - ramp_origin); }
};

namespace detail {

inline auto make_mf_factory(const SystemParams& p, const DetuningSchedule& sched) {
  return [p, &sched](double t_lo, double t_hi) {
    std::function<double(double)> kick;
    if (sched.drive && sched.drive->amplitude != 0.0) kick = sched.drive->on_segment(t_lo, t_hi);
    return [p, rate = sched.ramp_rate, origin = sched.ramp_origin, kick](double t, const State3& y,
                                                                         State3& dy) {
      double dc = rate * (t - origin);
      if (kick) dc += kick(t);
      const double shift = p.delta0 + dc + p.vbar * y[2];
      dy[0] = shift * y[1] - 0.5 * p.gamma * y[0];
      dy[1] = 2.0 * p.omega * (2.0 * y[2] - 1.0) - shift * y[0] - 0.5 * p.gamma * y[1];
      dy[2] = -p.omega * y[1] - p.gamma * y[2];
    };
  };
}

inline std::vector<double> schedule_edges(const DetuningSchedule& sched, double t0, double t1) {
  return sched.drive ? sched.drive->edges(t0, t1) : std::vector<double>{};
}

}  // namespace detail

/// Final state after evolving from t0 to t1 under `sched`.
inline BlochState evolve(const BlochState& s0, const SystemParams& p, const DetuningSchedule& sched,
                         double t0, double t1, const ode::Options& opt = {}) {
  const auto edges = detail::schedule_edges(sched, t0, t1);
  return to_state(ode::integrate<3>(detail::make_mf_factory(p, sched), to_array(s0), t0, t1, edges, opt));
}

/// Samples the trajectory at arbitrary ascending `times` within [t0, t1].
inline std::vector<BlochState> sample_trajectory(const BlochState& s0, const SystemParams& p,
                                                 const DetuningSchedule& sched, double t0, double t1,
                                                 std::span<const double> times,
                                                 const ode::Options& opt = {}) {
  std::vector<BlochState> out(times.size());
  const auto edges = detail::schedule_edges(sched, t0, t1);
  ode::integrate<3>(detail::make_mf_factory(p, sched), to_array(s0), t0, t1, edges, times,
                    [&](std::size_t i, double, const State3& y) { out[i] = to_state(y); }, opt);
  return out;
}

/// Uniformly sampled trajectory with channels sigma_x, sigma_y, n_r,
/// delta_c and transmission (identity readout); ramped schedules add the
/// total detuning Delta0 + ramp as `detuning`.
inline TimeSeries integrate_schedule(const BlochState& s0, const SystemParams& p,
                                     const DetuningSchedule& sched, double t0, double t1, double dt_out,
                                     const ode::Options& opt = {}) {
  validate_params(p);
  if (!(t1 > t0)) throw ValidationError("t1 must exceed t0");
  if (!(dt_out > 0.0)) throw ValidationError("dt_out must be positive");
  const auto times = ode::uniform_times(t0, t1, dt_out);
  const auto states = sample_trajectory(s0, p, sched, t0, t1, times, opt);
  std::vector<double> sx(times.size()), sy(times.size()), nr(times.size()), dc(times.size()),
      tr(times.size()), det(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    sx[i] = states[i].sigma_x;
    sy[i] = states[i].sigma_y;
    nr[i] = states[i].n_r;
    dc[i] = sched.drive ? sched.drive->eval(times[i]) : 0.0;
    tr[i] = transmission(nr[i]);
    det[i] = p.delta0 + sched.ramp(times[i]);
  }
  TimeSeries ts(t0, dt_out);
  ts.add_channel(channels::kSigmaX, std::move(sx));
  ts.add_channel(channels::kSigmaY, std::move(sy));
  ts.add_channel(channels::kNr, std::move(nr));
  ts.add_channel(channels::kDeltaC, std::move(dc));
  ts.add_channel(channels::kTransmission, std::move(tr));
  if (sched.ramp_rate != 0.0) ts.add_channel(channels::kDetuning, std::move(det));
  return ts;
}

/// Trajectory under an optional periodic drive; no drive means delta_c = 0.
inline TimeSeries integrate(const BlochState& s0, const SystemParams& p,
                            const std::optional<DriveWaveform>& drive, double t0, double t1,
                            double dt_out, const ode::Options& opt = {}) {
  DetuningSchedule sched;
  if (drive) sched.drive = validate_drive(*drive);
  return integrate_schedule(s0, p, sched, t0, t1, dt_out, opt);
}

// ---------------------------------------------------------------------------
// Steady states
//
// With all derivatives zero, the n_r equation gives sigma_y = -gamma n_r / Omega
// and the sigma_x equation gives sigma_x = (2/gamma)(Delta0 + Vbar n_r) sigma_y
// = -(2 n_r / Omega)(Delta0 + Vbar n_r). Substituting both into the sigma_y
// equation and multiplying by Omega/2:
//
//   Omega^2 (2 n_r - 1) + n_r (Delta0 + Vbar n_r)^2 + (gamma^2/4) n_r = 0
//
// which expands to
//
//   Vbar^2 n^3 + 2 Delta0 Vbar n^2 + (Delta0^2 + 2 Omega^2 + gamma^2/4) n - Omega^2 = 0.
// ---------------------------------------------------------------------------

struct Cubic {
  double c3, c2, c1, c0;

  double operator()(double n) const { return ((c3 * n + c2) * n + c1) * n + c0; }
  double derivative(double n) const { return (3.0 * c3 * n + 2.0 * c2) * n + c1; }
};

inline Cubic steady_state_cubic(const SystemParams& p) {
  validate_params(p);
  if (p.omega == 0.0) throw DegenerateError("degenerate: cubic collapses (omega = 0)");
  const double d = p.delta0, v = p.vbar, w2 = p.omega * p.omega;
  return {v * v, 2.0 * d * v, d * d + 2.0 * w2 + 0.25 * p.gamma * p.gamma, -w2};
}

/// Real roots in [0, 1], ascending. Roots come from the companion-matrix
/// eigenvalues (|Im| < 1e-8 counts as real), are polished by Newton steps
/// and clamped to [0, 1] when at most 1e-8 outside.
inline std::vector<double> real_roots_in_unit_interval(const Cubic& c) {
  std::vector<double> coeffs{c.c3, c.c2, c.c1, c.c0};
  while (!coeffs.empty() && coeffs.front() == 0.0) coeffs.erase(coeffs.begin());
  std::vector<double> candidates;
  const std::size_t degree = coeffs.empty() ? 0 : coeffs.size() - 1;
  if (degree == 1) {
    candidates.push_back(-coeffs[1] / coeffs[0]);
  } else if (degree >= 2) {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree),
                                                      static_cast<Eigen::Index>(degree));
    for (std::size_t k = 0; k < degree; ++k)
      companion(0, static_cast<Eigen::Index>(k)) = -coeffs[k + 1] / coeffs[0];
    for (std::size_t k = 1; k < degree; ++k)
      companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const auto z = es.eigenvalues()[k];
      if (std::abs(z.imag()) < 1e-8) candidates.push_back(z.real());
    }
  }
  std::vector<double> roots;
  for (double r : candidates) {
    for (int it = 0; it < 4; ++it) {
      const double d = c.derivative(r);
      if (d == 0.0) break;
      const double next = r - c(r) / d;
      if (!std::isfinite(next) || std::abs(c(next)) >= std::abs(c(r))) break;
      r = next;
    }
    if (r < 0.0 && r >= -1e-8) r = 0.0;
    if (r > 1.0 && r <= 1.0 + 1e-8) r = 1.0;
    if (r >= 0.0 && r <= 1.0) roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

enum class Stability { stable, unstable, marginal };

inline std::string to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "?";
}

inline Stability classify(std::span<const std::complex<double>> eigenvalues) {
  bool any_positive = false, all_negative = true;
  for (const auto& ev : eigenvalues) {
    if (ev.real() > kMarginalBand) any_positive = true;
    if (ev.real() >= -kMarginalBand) all_negative = false;
  }
  if (any_positive) return Stability::unstable;
  return all_negative ? Stability::stable : Stability::marginal;
}

struct FixedPoint {
  BlochState state;
  std::array<std::complex<double>, 3> eigenvalues;
  Stability stability;
};

inline std::array<std::complex<double>, 3> eigenvalues(const Eigen::Matrix3d& m) {
  Eigen::EigenSolver<Eigen::Matrix3d> es(m, false);
  std::array<std::complex<double>, 3> out;
  for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

/// Steady state reconstructed from a root of the cubic.
inline BlochState steady_state_from_population(double n_r, const SystemParams& p) {
  return {-(2.0 * n_r / p.omega) * (p.delta0 + p.vbar * n_r), -p.gamma * n_r / p.omega, n_r};
}

/// All steady states with Jacobian spectrum and stability, ascending in n_r.
inline std::vector<FixedPoint> fixed_points(const SystemParams& p) {
  const auto roots = real_roots_in_unit_interval(steady_state_cubic(p));
  std::vector<FixedPoint> out;
  out.reserve(roots.size());
  for (double n : roots) {
    FixedPoint fp;
    fp.state = steady_state_from_population(n, p);
    fp.eigenvalues = eigenvalues(jacobian(fp.state, p));
    fp.stability = classify(fp.eigenvalues);
    out.push_back(fp);
  }
  return out;
}

inline std::vector<FixedPoint> stable_fixed_points(const SystemParams& p) {
  auto all = fixed_points(p);
  std::erase_if(all, [](const FixedPoint& f) { return f.stability != Stability::stable; });
  return all;
}

inline std::size_t stable_count(const SystemParams& p) {
  if (p.omega == 0.0) return 1;  // the dark state
  return stable_fixed_points(p).size();
}

inline bool is_bistable(const SystemParams& p) { return stable_count(p) >= 2; }

/// Lowest- and highest-population stable states (rho^L and rho^H).
inline BlochState low_state(const SystemParams& p) {
  if (p.omega == 0.0) return {};
  const auto s = stable_fixed_points(p);
  if (s.empty()) throw DegenerateError("no stable fixed point");
  return s.front().state;
}

inline BlochState high_state(const SystemParams& p) {
  if (p.omega == 0.0) return {};
  const auto s = stable_fixed_points(p);
  if (s.empty()) throw DegenerateError("no stable fixed point");
  return s.back().state;
}

// ---------------------------------------------------------------------------
// Basins of attraction
// ---------------------------------------------------------------------------

enum class Coordinate { sigma_x, sigma_y, n_r };

inline std::string to_string(Coordinate c) {
  switch (c) {
    case Coordinate::sigma_x: return "sigma_x";
    case Coordinate::sigma_y: return "sigma_y";
    case Coordinate::n_r: return "n_r";
  }
  return "?";
}

struct BasinPlane {
  Coordinate horizontal = Coordinate::sigma_x;
  Coordinate vertical = Coordinate::n_r;
  /// Value of the remaining coordinate; unset means the unstable fixed
  /// point's value.
  std::optional<double> fixed_value;
  double h_min = -1.0, h_max = 1.0;
  double v_min = 0.0, v_max = 1.0;
};

struct BasinGrid {
  std::size_t nh = 41;
  std::size_t nv = 41;
};

struct BasinMap {
  static constexpr int kNone = -1;

  BasinPlane plane;           ///< with fixed_value resolved
  std::vector<double> h_axis;
  std::vector<double> v_axis;
  std::vector<FixedPoint> fixed_points;
  /// labels[iv * nh + ih]: index into fixed_points, or kNone.
  std::vector<int> labels;

  int label(std::size_t ih, std::size_t iv) const { return labels[iv * h_axis.size() + ih]; }
};

inline double linspace_at(double lo, double hi, std::size_t n, std::size_t i) {
  return n <= 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = linspace_at(lo, hi, n, i);
  return v;
}

/// Index of the stable fixed point whose basin contains s, or kNone if the
/// undriven flow has not come within kAttractTolerance of one by t_max.
inline int attractor_of(const BlochState& s, const SystemParams& p, const std::vector<FixedPoint>& fps,
                        double t_max = kBasinMaxTime, double chunk = 5.0) {
  const auto near = [&](const BlochState& x) -> int {
    for (std::size_t k = 0; k < fps.size(); ++k) {
      if (fps[k].stability != Stability::stable) continue;
      const double dx = x.sigma_x - fps[k].state.sigma_x, dy = x.sigma_y - fps[k].state.sigma_y,
                   dn = x.n_r - fps[k].state.n_r;
      if (std::sqrt(dx * dx + dy * dy + dn * dn) < kAttractTolerance) return static_cast<int>(k);
    }
    return BasinMap::kNone;
  };
  BlochState x = s;
  const DetuningSchedule none;
  for (double t = 0.0;; t += chunk) {
    if (const int k = near(x); k != BasinMap::kNone) return k;
    if (t >= t_max) return BasinMap::kNone;
    x = evolve(x, p, none, t, std::min(t + chunk, t_max));
  }
}

inline BasinMap basin_map(const SystemParams& p, BasinPlane plane = {}, BasinGrid grid = {},
                          unsigned threads = 0) {
  validate_params(p);
  if (!is_bistable(p)) throw ValidationError("basin_map requires bistable parameters");
  if (plane.horizontal == plane.vertical) throw ValidationError("basin plane axes must differ");
  if (grid.nh < 1 || grid.nv < 1) throw ValidationError("basin grid must be nonempty");
  BasinMap map;
  map.fixed_points = fixed_points(p);
  int fixed_coord = 3 - static_cast<int>(plane.horizontal) - static_cast<int>(plane.vertical);
  if (!plane.fixed_value) {
    const auto unstable = std::find_if(map.fixed_points.begin(), map.fixed_points.end(),
                                       [](const FixedPoint& f) { return f.stability == Stability::unstable; });
    const auto& ref = unstable != map.fixed_points.end() ? unstable->state : map.fixed_points.front().state;
    plane.fixed_value = to_array(ref)[static_cast<std::size_t>(fixed_coord)];
  }
  map.plane = plane;
  map.h_axis = linspace(plane.h_min, plane.h_max, grid.nh);
  map.v_axis = linspace(plane.v_min, plane.v_max, grid.nv);
  map.labels.assign(grid.nh * grid.nv, BasinMap::kNone);
  parallel_for(
      grid.nh * grid.nv,
      [&](std::size_t cell) {
        const std::size_t ih = cell % grid.nh, iv = cell / grid.nh;
        State3 s{};
        s[static_cast<std::size_t>(plane.horizontal)] = map.h_axis[ih];
        s[static_cast<std::size_t>(plane.vertical)] = map.v_axis[iv];
        s[static_cast<std::size_t>(fixed_coord)] = *plane.fixed_value;
        map.labels[cell] = attractor_of(to_state(s), p, map.fixed_points);
      },
      threads);
  return map;
}

}  // namespace rydmf

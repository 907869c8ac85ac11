#pragma once

// Exact single-atom Lindblad evolution over {|g>, |r>}, used as an
// independent check of the mean-field equations at Vbar = 0.
//
//   H = -(Delta0 + delta_c) |r><r| + Omega (|r><g| + |g><r|),   J = |g><r|,
//   d rho/dt = -i [H, rho] + gamma (J rho J^+ - {J^+ J, rho} / 2).
//
// Mean-field variables are read out as
//   n_r = rho_rr,   sigma_x = -2 Re rho_rg,   sigma_y = 2 Im rho_rg,
// the mapping for which both models satisfy identical equations. It differs
// from the textbook <sigma^x>, <sigma^y> by a rotation of pi about z, i.e.
// the mean-field equations are written for Omega -> -Omega.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>

#include "rydmf/core.hpp"
#include "rydmf/drive.hpp"
#include "rydmf/ode.hpp"

namespace rydmf {

using Complex = std::complex<double>;

/// Index 0 is |g>, index 1 is |r>.
class DensityMatrix2 {
 public:
  static constexpr double kTolerance = 1e-10;

  DensityMatrix2() : m_(Eigen::Matrix2cd::Zero()) { m_(0, 0) = 1.0; }
  explicit DensityMatrix2(const Eigen::Matrix2cd& m) : m_(m) {}

  static DensityMatrix2 ground() { return DensityMatrix2(); }
  static DensityMatrix2 rydberg() {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(1, 1) = 1.0;
    return DensityMatrix2(m);
  }
  static DensityMatrix2 maximally_mixed() { return DensityMatrix2(0.5 * Eigen::Matrix2cd::Identity()); }

  /// Inverse of the mean-field readout.
  static DensityMatrix2 from_bloch(const BlochState& s) {
    Eigen::Matrix2cd m;
    const Complex rg(-0.5 * s.sigma_x, 0.5 * s.sigma_y);
    m(1, 1) = s.n_r;
    m(0, 0) = 1.0 - s.n_r;
    m(1, 0) = rg;
    m(0, 1) = std::conj(rg);
    return DensityMatrix2(m);
  }

  const Eigen::Matrix2cd& matrix() const { return m_; }
  double rho_gg() const { return m_(0, 0).real(); }
  double rho_rr() const { return m_(1, 1).real(); }
  Complex rho_rg() const { return m_(1, 0); }
  Complex trace() const { return m_.trace(); }
  double purity() const { return (m_ * m_).trace().real(); }
  double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }

  BlochState to_bloch() const { return {-2.0 * rho_rg().real(), 2.0 * rho_rg().imag(), rho_rr()}; }

  void validate(double tol = kTolerance) const {
    if (std::abs(trace() - Complex(1.0, 0.0)) > tol) throw ValidationError("density matrix trace must be 1");
    if (hermiticity_error() > tol) throw ValidationError("density matrix must be Hermitian");
    if (min_eigenvalue() < -tol) throw ValidationError("density matrix must be positive semidefinite");
  }

 private:
  Eigen::Matrix2cd m_;
};

inline Eigen::Matrix2cd single_atom_hamiltonian(const SystemParams& p, double delta_c) {
  Eigen::Matrix2cd h = Eigen::Matrix2cd::Zero();
  h(1, 1) = -(p.delta0 + delta_c);
  h(1, 0) = p.omega;
  h(0, 1) = p.omega;
  return h;
}

/// Lindblad generator applied to an arbitrary 2x2 operator.
inline Eigen::Matrix2cd lindblad_generator(const Eigen::Matrix2cd& rho, const SystemParams& p, double delta_c) {
  const Eigen::Matrix2cd h = single_atom_hamiltonian(p, delta_c);
  Eigen::Matrix2cd jump = Eigen::Matrix2cd::Zero();
  jump(0, 1) = 1.0;  // |g><r|
  const Eigen::Matrix2cd jdj = jump.adjoint() * jump;
  const Complex i(0.0, 1.0);
  return -i * (h * rho - rho * h) + p.gamma * (jump * rho * jump.adjoint() - 0.5 * (jdj * rho + rho * jdj));
}

inline void require_noninteracting(const SystemParams& p) {
  validate_params(p);
  if (p.vbar != 0.0) throw ValidationError("single-atom Lindblad oracle requires vbar = 0");
}

inline Eigen::Matrix2cd lindblad_rhs(const DensityMatrix2& rho, const SystemParams& p, double delta_c) {
  require_noninteracting(p);
  return lindblad_generator(rho.matrix(), p, delta_c);
}

namespace detail {

// Hermitian 2x2 as four reals: rho_gg, rho_rr, Re rho_rg, Im rho_rg.
inline std::array<double, 4> pack(const Eigen::Matrix2cd& m) {
  return {m(0, 0).real(), m(1, 1).real(), m(1, 0).real(), m(1, 0).imag()};
}

inline Eigen::Matrix2cd unpack(const std::array<double, 4>& v) {
  Eigen::Matrix2cd m;
  m(0, 0) = v[0];
  m(1, 1) = v[1];
  m(1, 0) = Complex(v[2], v[3]);
  m(0, 1) = Complex(v[2], -v[3]);
  return m;
}

}  // namespace detail

/// Sampled exact evolution with channels n_r, sigma_x, sigma_y (mean-field
/// readout), rho_gg, trace and purity.
inline TimeSeries evolve_exact(const DensityMatrix2& rho0, const SystemParams& p,
                               const std::optional<DriveWaveform>& drive, double t0, double t1, double dt_out,
                               const ode::Options& opt = {}) {
  require_noninteracting(p);
  rho0.validate();
  if (!(t1 > t0)) throw ValidationError("t1 must exceed t0");
  std::optional<DriveWaveform> d;
  if (drive) d = validate_drive(*drive);
  const auto factory = [&p, &d](double t_lo, double t_hi) {
    std::function<double(double)> kick;
    if (d && d->amplitude != 0.0) kick = d->on_segment(t_lo, t_hi);
    return [&p, kick](double t, const std::array<double, 4>& y, std::array<double, 4>& dy) {
      dy = detail::pack(lindblad_generator(detail::unpack(y), p, kick ? kick(t) : 0.0));
    };
  };
  const auto times = ode::uniform_times(t0, t1, dt_out);
  const std::size_t n = times.size();
  std::vector<double> nr(n), sx(n), sy(n), gg(n), tr(n), pur(n);
  const auto edges = d ? d->edges(t0, t1) : std::vector<double>{};
  ode::integrate<4>(factory, detail::pack(rho0.matrix()), t0, t1, edges, times,
                    [&](std::size_t i, double, const std::array<double, 4>& y) {
                      const DensityMatrix2 rho(detail::unpack(y));
                      const BlochState b = rho.to_bloch();
                      nr[i] = b.n_r;
                      sx[i] = b.sigma_x;
                      sy[i] = b.sigma_y;
                      gg[i] = rho.rho_gg();
                      tr[i] = rho.trace().real();
                      pur[i] = rho.purity();
                    },
                    opt);
  TimeSeries ts(t0, dt_out);
  ts.add_channel(channels::kNr, std::move(nr));
  ts.add_channel(channels::kSigmaX, std::move(sx));
  ts.add_channel(channels::kSigmaY, std::move(sy));
  ts.add_channel("rho_gg", std::move(gg));
  ts.add_channel("trace", std::move(tr));
  ts.add_channel("purity", std::move(pur));
  return ts;
}

/// Largest |exact - mean-field| over the n_r, sigma_x and sigma_y channels.
inline double sup_norm_deviation(const TimeSeries& exact, const TimeSeries& mean_field) {
  if (exact.size() != mean_field.size()) throw ValidationError("trajectories differ in length");
  double worst = 0.0;
  for (const auto* name : {&channels::kNr, &channels::kSigmaX, &channels::kSigmaY}) {
    const auto& a = exact.channel(*name);
    const auto& b = mean_field.channel(*name);
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

}  // namespace rydmf

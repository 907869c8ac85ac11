#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rydmf/dynamics.hpp"
#include "rydmf/lindblad.hpp"

using namespace rydmf;

namespace {

DensityMatrix2 random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double x, y, z;
  do {
    x = u(rng);
    y = u(rng);
    z = u(rng);
  } while (x * x + y * y + z * z > 1.0);
  return DensityMatrix2::from_bloch({x, y, 0.5 * (z + 1)});
}

}  // namespace

TEST(DensityMatrix, Constructors) {
  EXPECT_NO_THROW(DensityMatrix2::ground().validate());
  EXPECT_NO_THROW(DensityMatrix2::rydberg().validate());
  EXPECT_NO_THROW(DensityMatrix2::maximally_mixed().validate());
  EXPECT_DOUBLE_EQ(DensityMatrix2::maximally_mixed().purity(), 0.5);
  EXPECT_DOUBLE_EQ(DensityMatrix2::rydberg().rho_rr(), 1.0);
}

TEST(DensityMatrix, BlochRoundTrip) {
  const BlochState b{0.3, -0.4, 0.6};
  const auto back = DensityMatrix2::from_bloch(b).to_bloch();
  EXPECT_NEAR(back.sigma_x, b.sigma_x, 1e-15);
  EXPECT_NEAR(back.sigma_y, b.sigma_y, 1e-15);
  EXPECT_NEAR(back.n_r, b.n_r, 1e-15);
}

TEST(DensityMatrix, ValidationRejectsUnphysical) {
  EXPECT_THROW(DensityMatrix2::from_bloch({0.0, 0.0, 1.5}).validate(), ValidationError);
  EXPECT_THROW(DensityMatrix2::from_bloch({1.0, 1.0, 0.5}).validate(), ValidationError);
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = 0.5;
  m(1, 1) = 0.5;
  m(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix2(m).validate(), ValidationError);
  EXPECT_THROW(DensityMatrix2(Eigen::Matrix2cd::Identity()).validate(), ValidationError);
}

TEST(LindbladRhs, DarkStateStationary) {
  const auto d = lindblad_rhs(DensityMatrix2::ground(), {0.0, 2.0, 0.0, 1.0}, 0.0);
  EXPECT_EQ(d.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LindbladRhs, PureDecay) {
  const auto d = lindblad_rhs(DensityMatrix2::rydberg(), {0.0, 0.0, 0.0, 1.0}, 0.0);
  EXPECT_DOUBLE_EQ(d(1, 1).real(), -1.0);
  EXPECT_DOUBLE_EQ(d(0, 0).real(), 1.0);
}

TEST(LindbladRhs, TracelessAndHermitian) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const SystemParams p{std::abs(u(rng)), u(rng), 0.0, 1.0};
    const auto d = lindblad_rhs(random_state(rng), p, u(rng));
    EXPECT_LT(std::abs(d.trace()), 1e-15);
    EXPECT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(LindbladRhs, RequiresNoInteraction) {
  EXPECT_THROW(lindblad_rhs(DensityMatrix2::ground(), kBistableReference, 0.0), ValidationError);
  EXPECT_THROW(evolve_exact(DensityMatrix2::ground(), kBistableReference, std::nullopt, 0, 1, 0.1),
               ValidationError);
}

// The readout (sigma_x, sigma_y, n_r) of the exact generator must equal the
// mean-field right-hand side at Vbar = 0 for every state, not only along
// trajectories.
TEST(LindbladRhs, ReadoutMatchesMeanFieldGenerator) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 100; ++k) {
    const SystemParams p{std::abs(u(rng)), u(rng), 0.0, 0.5 + std::abs(u(rng))};
    const double dc = u(rng);
    const auto rho = random_state(rng);
    const auto d = lindblad_rhs(rho, p, dc);
    const BlochState exact{-2.0 * d(1, 0).real(), 2.0 * d(1, 0).imag(), d(1, 1).real()};
    const BlochState mf = rhs(rho.to_bloch(), p, dc);
    EXPECT_NEAR(exact.sigma_x, mf.sigma_x, 1e-14);
    EXPECT_NEAR(exact.sigma_y, mf.sigma_y, 1e-14);
    EXPECT_NEAR(exact.n_r, mf.n_r, 1e-14);
  }
}

TEST(EvolveExact, RelaxesToSteadyState) {
  const auto ts = evolve_exact(DensityMatrix2::ground(), {0.5, 0.0, 0.0, 1.0}, std::nullopt, 0.0, 100.0, 1.0);
  EXPECT_NEAR(ts.channel(channels::kNr).back(), 1.0 / 3.0, 1e-6);
}

TEST(EvolveExact, MixedStateDecay) {
  const auto ts = evolve_exact(DensityMatrix2::maximally_mixed(), {0.0, 1.7, 0.0, 1.0}, std::nullopt, 0.0, 10.0, 0.1);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_NEAR(ts.channel(channels::kNr)[i], 0.5 * std::exp(-ts.time(i)), 1e-8);
    EXPECT_EQ(ts.channel(channels::kSigmaX)[i], 0.0);
    EXPECT_EQ(ts.channel(channels::kSigmaY)[i], 0.0);
  }
}

TEST(EvolveExact, PhysicalAlongTrajectory) {
  std::mt19937_64 rng(10);
  const auto rho0 = random_state(rng);
  const SystemParams p{1.2, -0.7, 0.0, 1.0};
  const auto ts = evolve_exact(rho0, p, DriveWaveform{20.0, 6.0, 3.0, KickShape::exponential}, 0.0, 100.0, 0.2);
  const double p0 = rho0.purity();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_NEAR(ts.channel("trace")[i], 1.0, 1e-12);
    EXPECT_LE(ts.channel("purity")[i], 1.0 + 1e-9);
    EXPECT_GE(ts.channel("purity")[i], 0.5 - 1e-9);
    const BlochState b{ts.channel("sigma_x")[i], ts.channel("sigma_y")[i], ts.channel("n_r")[i]};
    EXPECT_TRUE(b.inside_bloch_ball(1e-9));
  }
  EXPECT_NEAR(ts.channel("purity")[0], p0, 1e-14);
}

TEST(EvolveExact, MatchesMeanFieldWhenNoninteracting) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const SystemParams p{1.0 + u(rng), 4 * u(rng), 0.0, 1.0};
    const auto rho0 = random_state(rng);
    const DriveWaveform d{40.0 + 10 * u(rng), 8 * u(rng), 2.0, k % 2 ? KickShape::square : KickShape::exponential};
    const auto ex = evolve_exact(rho0, p, d, 0.0, 200.0, 0.25);
    const auto mf = integrate(rho0.to_bloch(), p, d, 0.0, 200.0, 0.25);
    double worst = 0.0;
    for (std::size_t i = 0; i < ex.size(); ++i)
      worst = std::max(worst, std::abs(ex.channel("n_r")[i] - mf.channel("n_r")[i]));
    EXPECT_LT(worst, 1e-8) << k;
    EXPECT_LT(sup_norm_deviation(ex, mf), 1e-7) << k;
  }
}

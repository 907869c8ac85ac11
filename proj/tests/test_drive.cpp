#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rydmf/drive.hpp"

using namespace rydmf;

TEST(DriveWaveform, SquareKickWindow) {
  const DriveWaveform d{50.0, -7.0, 2.0, KickShape::square};
  EXPECT_DOUBLE_EQ(d.eval(1.0), -7.0);
  EXPECT_DOUBLE_EQ(d.eval(10.0), 0.0);
  EXPECT_DOUBLE_EQ(d.eval(51.0), -7.0);
  EXPECT_DOUBLE_EQ(d.eval(-49.0), -7.0);
  EXPECT_TRUE(d.satisfies_timescale_ordering());
}

TEST(DriveWaveform, ExponentialDecaysFromOnset) {
  const DriveWaveform d{50.0, 4.0, 2.0, KickShape::exponential};
  EXPECT_DOUBLE_EQ(d.eval(0.0), 4.0);
  EXPECT_NEAR(d.eval(2.0), 4.0 * std::exp(-1.0), 1e-15);
}

TEST(DriveWaveform, Periodic) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  const DriveWaveform sq{50.0, -7.0, 2.0, KickShape::square, 3.0};
  const DriveWaveform ex{50.0, -7.0, 2.0, KickShape::exponential, 3.0};
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    EXPECT_EQ(sq.eval(t), sq.eval(t + sq.period)) << t;
    EXPECT_NEAR(ex.eval(t), ex.eval(t + ex.period), 1e-12) << t;
  }
}

TEST(DriveWaveform, EdgesAndSegments) {
  const DriveWaveform d{10.0, 1.0, 2.0, KickShape::square, 0.0};
  EXPECT_EQ(d.edges(0.0, 25.0), (std::vector<double>{0.0, 2.0, 10.0, 12.0, 20.0, 22.0}));
  EXPECT_DOUBLE_EQ(d.on_segment(0.0, 2.0)(1.5), 1.0);
  EXPECT_DOUBLE_EQ(d.on_segment(2.0, 10.0)(9.9), 0.0);
  const DriveWaveform e{10.0, 1.0, 2.0, KickShape::exponential, 0.0};
  EXPECT_EQ(e.edges(0.0, 25.0), (std::vector<double>{0.0, 10.0, 20.0}));
  // The smooth segment continues past the period boundary instead of resetting.
  EXPECT_NEAR(e.on_segment(0.0, 10.0)(10.0), std::exp(-5.0), 1e-15);
  EXPECT_TRUE((DriveWaveform{10.0, 0.0, 2.0}).edges(0.0, 100.0).empty());
}

TEST(DriveWaveform, Validation) {
  EXPECT_NO_THROW(validate_drive(default_drive(-10.0)));
  EXPECT_THROW(validate_drive({0.0, 1.0, 2.0}), ValidationError);
  EXPECT_THROW(validate_drive({10.0, 1.0, 0.0}), ValidationError);
  EXPECT_THROW(validate_drive({10.0, 1.0, 10.0}), ValidationError);
  EXPECT_NO_THROW(validate_drive({10.0, 1.0, 10.0, KickShape::exponential}));
  EXPECT_THROW(validate_drive({10.0, NAN, 2.0}), ValidationError);
  EXPECT_EQ(kick_shape_from_string("exponential"), KickShape::exponential);
  EXPECT_THROW(kick_shape_from_string("sine"), ValidationError);
}

TEST(FieldToFrequency, CalibrationPoint) {
  const auto m = FieldToFrequencyMap::from_point(11.6, 11000.0);
  EXPECT_NEAR(m.kappa, 948.2758620689655, 1e-9);
  EXPECT_NEAR(period_from_bfield(11.6, m).frequency_hz, 11000.0, 1e-9);
  const FieldToFrequencyMap k{948.3};
  EXPECT_NEAR(period_from_bfield(11.6, k).frequency_hz, 11.0e3, 0.05e3);
  EXPECT_NEAR(period_from_bfield(14.88, k).frequency_hz, 14.1e3, 0.05e3);
}

TEST(FieldToFrequency, Linear) {
  const FieldToFrequencyMap k{948.3};
  const auto a = period_from_bfield(5.0, k), b = period_from_bfield(10.0, k);
  EXPECT_DOUBLE_EQ(b.frequency_hz, 2.0 * a.frequency_hz);
  EXPECT_DOUBLE_EQ(b.period_s, 0.5 * a.period_s);
}

TEST(FieldToFrequency, Errors) {
  EXPECT_THROW(period_from_bfield(0.0, {948.3}), ValidationError);
  EXPECT_THROW(period_from_bfield(-1.0, {948.3}), ValidationError);
  EXPECT_THROW(period_from_bfield(1.0, {0.0}), ValidationError);
  EXPECT_THROW(FieldToFrequencyMap::from_point(0.0, 1.0), ValidationError);
  EXPECT_THROW(period_in_gamma_units(1e-4, 0.0), ValidationError);
}

TEST(FieldToFrequency, FitThroughOrigin) {
  const std::vector<double> b{1, 2, 3}, f{2, 4, 6};
  EXPECT_DOUBLE_EQ(fit_through_origin(b, f).kappa, 2.0);
  EXPECT_THROW(fit_through_origin(std::vector<double>{}, std::vector<double>{}), ValidationError);
}

TEST(FieldToFrequency, PeriodInGammaUnits) {
  EXPECT_DOUBLE_EQ(period_in_gamma_units(1e-4, 5e5), 50.0);
}

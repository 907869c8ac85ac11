#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rydmf/core.hpp"

using namespace rydmf;

TEST(SystemParams, ReferencePointIsValid) {
  EXPECT_EQ(validate_params(kBistableReference), kBistableReference);
  EXPECT_NO_THROW(validate_params({0.0, 0.0, 0.0, 1.0}));
}

TEST(SystemParams, NegativeGammaRejected) {
  try {
    validate_params({1.0, 0.0, 0.0, -1.0});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "gamma must be positive");
  }
  EXPECT_THROW(validate_params({1.0, 0.0, 0.0, 0.0}), ValidationError);
}

TEST(SystemParams, NonFiniteAndNegativeOmegaRejected) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate_params({nan, 0.0, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(validate_params({1.0, INFINITY, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(validate_params({1.0, 0.0, nan, 1.0}), ValidationError);
  EXPECT_THROW(validate_params({-0.1, 0.0, 0.0, 1.0}), ValidationError);
}

TEST(SystemParams, ValidateIsIdempotent) {
  const SystemParams p{0.3, -2.0, 4.0, 0.5};
  EXPECT_EQ(validate_params(validate_params(p)), validate_params(p));
}

TEST(BlochState, RadiusAndBall) {
  EXPECT_DOUBLE_EQ((BlochState{0, 0, 0}).bloch_radius_squared(), 1.0);
  EXPECT_DOUBLE_EQ((BlochState{0, 0, 0.5}).bloch_radius_squared(), 0.0);
  EXPECT_TRUE((BlochState{0.6, 0.8, 0.5}).inside_bloch_ball());
  EXPECT_FALSE((BlochState{0.6, 0.8, 0.9}).inside_bloch_ball());
  EXPECT_FALSE((BlochState{0, 0, -0.1}).inside_bloch_ball());
}

TEST(Transmission, AffineReadout) {
  EXPECT_DOUBLE_EQ(transmission(0.0, {1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(transmission(0.5, {1, 0}), 0.5);
  EXPECT_DOUBLE_EQ(transmission(0.25, {2, 0.1}), 0.6);
}

TEST(TimeSeries, ChannelsKeepInsertionOrder) {
  TimeSeries ts(1.0, 0.5);
  ts.add_channel("b", {1, 2, 3});
  ts.add_channel("a", {4, 5, 6});
  EXPECT_EQ(ts.channel_names(), (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(ts.size(), 3u);
  EXPECT_DOUBLE_EQ(ts.time(2), 2.0);
  EXPECT_DOUBLE_EQ(ts.t_end(), 2.0);
  EXPECT_NO_THROW(ts.validate());
}

TEST(TimeSeries, RejectsBadInput) {
  EXPECT_THROW(TimeSeries(0.0, 0.0), ValidationError);
  EXPECT_THROW(TimeSeries(0.0, -1.0), ValidationError);
  TimeSeries ts(0.0, 1.0);
  EXPECT_THROW(ts.validate(), ValidationError);
  ts.add_channel("x", {1});
  EXPECT_THROW(ts.validate(), ValidationError);
  EXPECT_THROW(ts.add_channel("x", {2}), ValidationError);
  EXPECT_THROW(ts.add_channel("y", {1, 2}), ValidationError);
  EXPECT_THROW(ts.channel("z"), ValidationError);
}

TEST(TimeSeries, SliceShiftsOrigin) {
  TimeSeries ts(0.0, 0.25);
  ts.add_channel("x", {0, 1, 2, 3, 4});
  const auto s = ts.slice(2, 3);
  EXPECT_DOUBLE_EQ(s.t0(), 0.5);
  EXPECT_EQ(s.channel("x"), (std::vector<double>{2, 3, 4}));
  EXPECT_THROW(ts.slice(3, 3), ValidationError);
}

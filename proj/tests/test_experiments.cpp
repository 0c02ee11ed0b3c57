#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "lecam/experiments.hpp"
#include "lecam/stats.hpp"
#include "oracle_values.hpp"

using namespace lecam;

TEST(Theta, CosineReferenceValues) {
  const auto f = densities::from_spec("cosine");
  const auto t3 = theta_of(f, 3);
  const auto t4 = theta_of(f, 4);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(t3[i], oracle::cosine_theta_m3[i], 1e-14);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(t4[i], oracle::cosine_theta_m4[i], 1e-14);
  EXPECT_NEAR(theta_of(f, 2)[0], 0.5, 1e-14);
}

TEST(Theta, SumsToOneAndMatchesAffineClosedForm) {
  const auto f = densities::affine(0.6);
  for (std::size_t m : {2u, 5u, 17u}) {
    const auto t = theta_of(f, m);
    EXPECT_NEAR(std::accumulate(t.theta.begin(), t.theta.end(), 0.0), 1.0, 1e-13);
    // Midpoint rule is exact for linear f.
    for (std::size_t i = 0; i < m; ++i) EXPECT_NEAR(t[i], f(midpoint(i, m)) / static_cast<double>(m), 1e-15);
  }
  EXPECT_THROW(theta_of(f, 1), usage_error);
}

TEST(Midpoints, ZeroBasedCells) {
  EXPECT_DOUBLE_EQ(midpoint(0, 4), 0.125);
  EXPECT_DOUBLE_EQ(midpoint(3, 4), 0.875);
  EXPECT_DOUBLE_EQ(cell_lo(1, 4), 0.25);
  EXPECT_DOUBLE_EQ(cell_hi(1, 4), 0.5);
}

TEST(SqrtCells, UniformIsOneOverM) {
  for (double v : sqrt_cell_integrals(densities::uniform(), 7)) EXPECT_NEAR(v, 1.0 / 7.0, 1e-15);
}

TEST(SampleIid, InUnitIntervalAndDeterministic) {
  const auto f = densities::from_spec("cosine");
  const auto a = sample_iid(f, 500, 3);
  EXPECT_EQ(a, sample_iid(f, 500, 3));
  EXPECT_NE(a, sample_iid(f, 500, 4));
  for (double x : a) EXPECT_TRUE(x >= 0.0 && x < 1.0);
}

TEST(SampleIid, LawMatchesDensity) {
  const auto f = densities::affine(0.9);
  auto cdf = [](double x) { return x + 0.45 * (x * x - x); };
  const auto ks = stats::ks_test(sample_iid(f, 20000, 5), cdf);
  EXPECT_GT(ks.p_value, 1e-3);
}

TEST(SampleIid, StallsWhenEnvelopeIsWrong) {
  DensityModel f = densities::uniform();
  f.eval = [](double) { return 0.0; };
  EXPECT_THROW(sample_iid(f, 10, 1), domain_error);
  DensityModel g = densities::uniform();
  g.eval = [](double) { return 3.0; };
  EXPECT_THROW(sample_iid(g, 10, 1), domain_error);
}

TEST(Multinomial, SumsToNAndHasRightMeans) {
  const std::vector<double> theta{0.1, 0.2, 0.3, 0.4};
  std::vector<double> mean(4, 0.0);
  for (std::uint64_t r = 0; r < 2000; ++r) {
    const auto c = sample_multinomial(100, theta, r);
    EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::size_t{0}), 100u);
    for (std::size_t i = 0; i < 4; ++i) mean[i] += static_cast<double>(c[i]) / 2000.0;
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const double se = std::sqrt(100 * theta[i] * (1 - theta[i]) / 2000.0);
    EXPECT_NEAR(mean[i], 100 * theta[i], 5 * se);
  }
}

TEST(GaussianExperiments, ShapesAndMeans) {
  const auto f = densities::from_spec("cosine");
  const auto theta = theta_of(f, 8);
  EXPECT_EQ(sample_gaussian_coords(theta, 100, 1).size(), 8u);
  EXPECT_EQ(sample_gaussian_increments(f, 100, 8, 1).size(), 8u);
  // With huge n the noise vanishes.
  const auto y = sample_gaussian_coords(theta, 1000000000000, 2);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(y[i], std::sqrt(theta[i] / 8.0), 1e-5);
}

TEST(WhiteNoise, StartsAtZeroAndHasRightVariance) {
  const auto f = densities::uniform();
  stats::Moments end;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    const auto t = sample_white_noise(f, 25, 16, r);
    ASSERT_EQ(t.values.front(), 0.0);
    end.add(t.values.back());
  }
  EXPECT_NEAR(end.mean(), 1.0, 4 * end.mean_se());
  EXPECT_NEAR(end.variance(), 0.01, 4 * end.variance_se());
}

TEST(Increments, RequireDivisibleGrid) {
  const auto t = sample_white_noise(densities::uniform(), 10, 12, 1);
  EXPECT_EQ(increments(t, 4).size(), 4u);
  const auto three = increments(t, 3);
  EXPECT_NEAR(std::accumulate(three.begin(), three.end(), 0.0), t.values.back(), 1e-14);
  EXPECT_THROW(increments(t, 5), usage_error);
}

TEST(ExperimentId, Validation) {
  EXPECT_THROW((ExperimentId{ExperimentKind::multinomial, 10, 1}.validate()), usage_error);
  EXPECT_THROW((ExperimentId{ExperimentKind::white_noise, 10, 8, 4}.validate()), usage_error);
  EXPECT_NO_THROW((ExperimentId{ExperimentKind::white_noise, 10, 8, 8}.validate()));
  EXPECT_EQ((ExperimentId{ExperimentKind::gaussian_coords, 1, 2}.name()), "gaussian_coords");
}

TEST(SampleIo, RoundTripAndErrors) {
  std::stringstream ss;
  write_sample(ss, std::vector<double>{0.25, 0.5, 1.0 / 3.0});
  EXPECT_EQ(ss.str(), "0.25\n0.5\n0.333333333333\n");
  const auto back = read_sample(ss);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_DOUBLE_EQ(back[2], 0.333333333333);

  std::stringstream bad("0.1\n\n0.2\nabc\n");
  try {
    read_sample(bad);
    FAIL();
  } catch (const usage_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(Trajectory, CsvHeader) {
  std::stringstream ss;
  write_trajectory_csv(ss, uniform_grid(2));
  EXPECT_EQ(ss.str(), "time,value\n0,0\n0.5,0\n1,0\n");
}

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lecam/equivalence.hpp"
#include "lecam/stats.hpp"
#include "oracle_values.hpp"

using namespace lecam;

namespace {
RateParams params(double n, double m, double gamma = 1.0) { return {.n = n, .m = m, .gamma = gamma}; }
}  // namespace

TEST(RateParams, Validation) {
  EXPECT_THROW(params(0.5, 4).validate(), usage_error);
  EXPECT_THROW(params(10, 1).validate(), usage_error);
  EXPECT_THROW(params(10, 4, 0.0).validate(), usage_error);
  EXPECT_THROW((RateParams{.n = 10, .m = 4, .gamma = 1, .carter_constant = 0}.validate()), usage_error);
}

TEST(DensityReconstructionBound, Examples) {
  EXPECT_LT(bound_density_reconstruction(params(1, 1e6)), 2e-9);
  // At gamma = 1 the m^{-3/2} term dominates m^{-2}; doubling m divides by
  // 2^{3/2} in the limit.
  EXPECT_NEAR(bound_density_reconstruction(params(100, 1e8)) / bound_density_reconstruction(params(100, 2e8)),
              std::pow(2.0, 1.5), 1e-3);
  // n = m^{2+gamma}: bound = m^{(2+gamma)/2} (m^{-3/2} + m^{-1-gamma}).
  for (double gamma : {0.25, 0.5, 1.0})
    for (double m : {4.0, 10.0, 37.0}) {
      const double n = std::pow(m, 2.0 + gamma);
      const double expect = std::pow(m, (2.0 + gamma) / 2.0) * (std::pow(m, -1.5) + std::pow(m, -1.0 - gamma));
      EXPECT_NEAR(bound_density_reconstruction(params(n, m, gamma)), expect, 1e-12 * expect);
    }
}

TEST(DensityReconstructionBound, ClassConstantScales) {
  RateParams p = params(1000, 10);
  const double base = bound_density_reconstruction(p);
  p.class_constant = 3.0;
  EXPECT_DOUBLE_EQ(bound_density_reconstruction(p), 3.0 * base);
}

TEST(CarterBounds, Examples) {
  EXPECT_NEAR(bound_carter_multinomial(params(4, 2)), std::log(2.0), 1e-15);
  EXPECT_NEAR(bound_carter_multinomial(params(400, 7)) / bound_carter_multinomial(params(1600, 7)), 2.0, 1e-14);
  EXPECT_NEAR(bound_carter_multinomial(params(9, std::exp(1.0))), std::exp(1.0) / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(bound_carter_independent(params(4, 2)), 1.0);
  EXPECT_DOUBLE_EQ(bound_carter_independent(params(50, 8)), 2.0 * bound_carter_independent(params(50, 4)));
  EXPECT_DOUBLE_EQ(bound_carter_independent(params(49, 7)), 1.0);
  RateParams p = params(49, 7);
  p.carter_constant = 2.5;
  EXPECT_DOUBLE_EQ(bound_carter_independent(p), 2.5);
}

TEST(GaussianLink, UniformIsExactlyZero) {
  for (double m : {2.0, 7.0, 64.0}) EXPECT_EQ(bound_gaussian_link(params(1000, m), densities::uniform()), 0.0);
}

TEST(GaussianLink, CosineReferenceValues) {
  const auto f = densities::from_spec("cosine");
  const double ms[] = {8, 16, 32, 64, 128};
  for (std::size_t k = 0; k < 5; ++k)
    EXPECT_NEAR(bound_gaussian_link(params(1000, ms[k]), f) / oracle::cosine_gaussian_link[k], 1.0, 1e-6);
}

TEST(GaussianLink, ScalesAsSqrtN) {
  const auto f = densities::from_spec("cosine");
  EXPECT_NEAR(bound_gaussian_link(params(4000, 16), f) / bound_gaussian_link(params(1000, 16), f), 2.0, 1e-12);
}

TEST(GaussianLink, SlopeInMIsMinusTwo) {
  // Each summand is a Jensen gap of size O(m^-3) for C^1 densities, so the
  // bound decays like m^-2; faster than the generic m^{-1/2} allowance.
  const auto f = densities::from_spec("cosine");
  std::vector<double> x, y;
  for (double m : {8.0, 16.0, 32.0, 64.0, 128.0}) {
    x.push_back(std::log(m));
    y.push_back(std::log(bound_gaussian_link(params(1000, m), f)));
  }
  const double slope = stats::least_squares(x, y).slope;
  EXPECT_NEAR(slope, -2.0, 0.3);
  EXPECT_LE(slope, -0.9);
}

TEST(ChooseM, Examples) {
  EXPECT_EQ(choose_m(1024, 1.0), 10u);
  EXPECT_EQ(choose_m(2, 1.0), 2u);
  EXPECT_EQ(choose_m(2, 0.1), 2u);
  EXPECT_EQ(choose_m(1000000, 0.5), 251u);
  EXPECT_EQ(choose_m(1000, 1.0), 10u);  // pow lands just below 10
  EXPECT_THROW(choose_m(1, 1.0), usage_error);
  EXPECT_THROW(choose_m(100, 0.0), usage_error);
}

TEST(ChainBound, LinksNonNegativeAndTotalIsSum) {
  for (std::size_t n : {16u, 1000u, 1u << 20})
    for (double gamma : {0.25, 1.0}) {
      const ChainBound b = total_bound(n, gamma);
      EXPECT_GE(b.density_multinomial, 0.0);
      EXPECT_GE(b.multinomial_gaussian, 0.0);
      EXPECT_GE(b.coords_increments, 0.0);
      EXPECT_GE(b.increments_white_noise, 0.0);
      EXPECT_DOUBLE_EQ(b.total(),
                       b.density_multinomial + b.multinomial_gaussian + b.coords_increments + b.increments_white_noise);
      for (double link : {b.density_multinomial, b.multinomial_gaussian, b.coords_increments, b.increments_white_noise})
        EXPECT_GE(b.total(), link);
    }
}

TEST(ChainBound, TuningIsNearOptimal) {
  for (double gamma : {0.25, 0.5, 1.0})
    for (int k = 10; k <= 20; ++k) {
      const std::size_t n = std::size_t{1} << k;
      const double ratio = total_bound(n, gamma).total() / optimal_chain_bound(n, gamma).total();
      EXPECT_GE(ratio, 1.0 - 1e-12);
      EXPECT_LE(ratio, 2.0) << "gamma=" << gamma << " n=2^" << k;
    }
}

TEST(ChainBound, RatioToStatedRateStaysBounded) {
  for (double gamma : {0.25, 0.5, 1.0}) {
    std::vector<double> tuned, best;
    for (int k = 10; k <= 20; ++k) {
      const std::size_t n = std::size_t{1} << k;
      tuned.push_back(total_bound(n, gamma).total() / stated_rate(n, gamma));
      best.push_back(optimal_chain_bound(n, gamma).total() / stated_rate(n, gamma));
    }
    for (const auto* v : {&tuned, &best}) {
      const auto [lo, hi] = std::minmax_element(v->begin(), v->end());
      EXPECT_LE(*hi / *lo, 4.0) << "gamma=" << gamma;
    }
  }
}

TEST(ChainBound, DecreasesInNOnceMGrows) {
  double prev = total_bound(1u << 12, 0.5).total();
  for (int k = 13; k <= 22; ++k) {
    const double cur = total_bound(std::size_t{1} << k, 0.5).total();
    EXPECT_LT(cur, prev * 1.05) << k;
    prev = cur;
  }
}

TEST(StatedRate, Branches) {
  EXPECT_NEAR(stated_rate(1024, 0.5), std::pow(1024.0, -0.1) * std::log(1024.0), 1e-15);
  EXPECT_NEAR(stated_rate(1024, 0.25), std::pow(1024.0, -0.25 / 4.5) * std::log(1024.0), 1e-15);
  EXPECT_NEAR(stated_rate(1024, 1.0), std::pow(1024.0, -0.1) * std::log(1024.0), 1e-15);
}

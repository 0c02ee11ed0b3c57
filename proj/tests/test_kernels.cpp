#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "lecam/approx.hpp"
#include "lecam/kernels.hpp"
#include "lecam/stats.hpp"
#include "lecam/tent.hpp"

using namespace lecam;

TEST(TentBasis, PartitionOfUnity) {
  for (std::size_t m : {2u, 3u, 8u, 33u}) {
    const TentBasis b(m);
    for (int k = 0; k <= 1000; ++k) {
      const double x = k / 1000.0;
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += b.value(j, x);
      EXPECT_NEAR(s, static_cast<double>(m), 1e-12) << "m=" << m << " x=" << x;
    }
  }
}

TEST(TentBasis, EachTentIsADensity) {
  const TentBasis b(6);
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_EQ(b.cdf(j, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(b.cdf(j, 1.0), 1.0);
    // cdf against a fine Riemann sum of value().
    double acc = 0.0;
    const int steps = 60000;
    for (int k = 0; k < steps; ++k) {
      const double x = (k + 0.5) / steps;
      acc += b.value(j, x) / steps;
      if ((k + 1) % 6000 == 0) {
        EXPECT_NEAR(b.cdf(j, (k + 1.0) / steps), acc, 1e-6);
      }
    }
  }
}

TEST(TentBasis, PeaksAtMidpoints) {
  const TentBasis b(5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(b.value(j, b.knot(i)), i == j ? 5.0 : 0.0, 1e-12);
}

TEST(TentBasis, QuantileInvertsCdf) {
  const TentBasis b(7);
  for (std::size_t j = 0; j < 7; ++j)
    for (double u : {0.01, 0.2, 0.5, 0.77, 0.99}) EXPECT_NEAR(b.cdf(j, b.quantile(j, u)), u, 1e-13);
  EXPECT_THROW(b.value(7, 0.5), usage_error);
  EXPECT_THROW(TentBasis(1), usage_error);
}

TEST(PiecewiseLinear, ReconstructionIsADensity) {
  const auto f = densities::from_spec("cosine");
  for (std::size_t m : {2u, 8u, 31u}) {
    const auto g = reconstruct(f, m);
    EXPECT_NEAR(g.integral(), 1.0, 1e-13);
    EXPECT_GT(g.min_value(), 0.0);
    const auto theta = theta_of(f, m);
    for (std::size_t j = 0; j < m; ++j) EXPECT_NEAR(g(midpoint(j, m)), m * theta[j], 1e-12);
  }
}

TEST(PiecewiseLinear, CdfMatchesTentCombination) {
  const std::vector<double> w{0.1, 0.4, 0.3, 0.2};
  const auto g = PiecewiseLinear::from_tent_weights(w);
  const TentBasis b(4);
  for (double x : {0.05, 0.2, 0.5, 0.61, 0.99}) {
    double c = 0.0;
    for (std::size_t j = 0; j < 4; ++j) c += w[j] * b.cdf(j, x);
    EXPECT_NEAR(g.cdf(x), c, 1e-14);
  }
}

TEST(BinCounts, CellsAndErrors) {
  const std::vector<double> xs{0.0, 0.24, 0.25, 0.5, 0.99, 1.0};
  EXPECT_EQ(bin_counts(xs, 4), (Counts{2, 1, 1, 2}));
  EXPECT_THROW(bin_counts(std::vector<double>{1.2}, 4), domain_error);
}

TEST(MidpointKernel, PreservesCountsAndShuffles) {
  const auto k = midpoint_kernel(4, 10);
  const Counts c{1, 2, 3, 4};
  const auto xs = k.sample(c, 9);
  EXPECT_EQ(bin_counts(xs, 4), c);
  EXPECT_EQ(xs, k.sample(c, 9));
  EXPECT_THROW(k.sample(Counts{1, 2, 3}, 1), usage_error);
  EXPECT_THROW(k.sample(Counts{1, 2, 3, 5}, 1), usage_error);
}

TEST(ReconstructionKernel, RejectsNonMidpoints) {
  const auto k = reconstruction_kernel(4);
  EXPECT_THROW(k.sample(0.3, 1), domain_error);
  EXPECT_NO_THROW(k.sample(0.375, 1));
}

TEST(ReconstructionKernel, PushforwardOfMidpointLawIsFhat) {
  const auto f = densities::from_spec("cosine");
  const auto theta = theta_of(f, 8);
  const auto pushed = reconstruction_kernel(8).pushforward(midpoint_law(theta.theta));
  const auto direct = reconstruct(f, 8);
  for (double x : {0.0, 0.03, 0.4, 0.77, 1.0}) EXPECT_NEAR(pushed(x), direct(x), 1e-12);
}

TEST(ReconstructionKernel, SamplesFollowTheTent) {
  const auto k = reconstruction_kernel(5);
  const TentBasis b(5);
  for (std::size_t j : {0u, 2u, 4u}) {
    std::vector<double> xs(5000);
    for (std::size_t r = 0; r < xs.size(); ++r) xs[r] = k.sample(b.knot(j), rng::derive(1, "t", r));
    EXPECT_GT(stats::ks_test(xs, [&](double x) { return b.cdf(j, x); }).p_value, 1e-3);
  }
}

TEST(Compose, SpaceMismatchIsUsageError) {
  EXPECT_THROW(compose(binning_kernel(4, 10), midpoint_kernel(5, 10)), usage_error);
  EXPECT_THROW(compose(identity_kernel<double, DiscreteLaw>(spaces::real()), reconstruction_kernel(4)), usage_error);
}

TEST(Compose, PushforwardComposes) {
  const auto id = identity_kernel<double, DiscreteLaw>(spaces::midpoints(4));
  const auto k = compose(id, reconstruction_kernel(4));
  ASSERT_TRUE(k.has_pushforward());
  const auto law = midpoint_law(std::vector<double>{0.25, 0.25, 0.25, 0.25});
  EXPECT_NEAR(k.pushforward(law)(0.3), 1.0, 1e-15);
}

TEST(DeterministicKernel, IgnoresSeedAndHasNoPushforward) {
  const auto k = binning_kernel(3, 2);
  EXPECT_EQ(k.sample({0.1, 0.9}, 1), k.sample({0.1, 0.9}, 2));
  EXPECT_FALSE(k.has_pushforward());
  EXPECT_THROW(k.pushforward(NoLaw{}), usage_error);
}

TEST(ProductKernel, ArityAndPushforward) {
  const auto p = power_kernel(reconstruction_kernel(4), 3);
  EXPECT_EQ(p.source().dim, 3u);
  EXPECT_THROW(p.sample({0.125, 0.375}, 1), usage_error);
  const auto laws = p.pushforward(std::vector<DiscreteLaw>(3, DiscreteLaw::point_mass(0.375)));
  EXPECT_EQ(laws.size(), 3u);
  EXPECT_DOUBLE_EQ(laws[1](0.375), 4.0);
}

TEST(TransportChain, OutputLawIsFhat) {
  const auto f = densities::from_spec("cosine");
  const auto fhat = reconstruct(f, 8);
  const auto chain = transport_chain(8, 20000);
  const auto y = chain.sample(sample_iid(f, 20000, 1), 2);
  EXPECT_EQ(y, chain.sample(sample_iid(f, 20000, 1), 2));
  EXPECT_GT(stats::ks_test(y, [&](double x) { return fhat.cdf(x); }).p_value, 1e-3);
}

TEST(TransportChain, CountsOnlyMode) {
  const auto k = counts_transport(3, 6);
  const auto y = k.sample(Counts{3, 1, 2}, 4);
  EXPECT_EQ(y.size(), 6u);
  for (double x : y) EXPECT_TRUE(x >= 0.0 && x <= 1.0);
}

TEST(Ystar, EndpointIsSumOfIncrements) {
  const std::vector<double> incs{0.1, 0.3, -0.2, 0.25};
  const auto t = synthesize_ystar(incs, 100, 5, 16);
  EXPECT_EQ(t.values.front(), 0.0);
  EXPECT_NEAR(t.values.back(), 0.45, 1e-14);
  EXPECT_THROW(synthesize_ystar(incs, 100, 5, 3), usage_error);
  EXPECT_THROW(synthesize_ystar(std::vector<double>{1.0}, 100, 5, 3), usage_error);
}

TEST(Ystar, BridgePartHasBinomialVariance) {
  // With fixed increments only the bridges vary:
  //   Var y*_t = (1/(4nm)) sum_i F_i(t)(1 - F_i(t)),  F_i(t) = \int_0^t V_i.
  // At t = 1 every B_i(1) = 0 in either bridge mode.
  const std::vector<double> incs(8, 0.125);
  const TentBasis basis(8);
  double expected = 0.0;
  for (std::size_t i = 0; i < 8; ++i) expected += basis.cdf(i, 0.5) * (1.0 - basis.cdf(i, 0.5));
  expected /= 4.0 * 25 * 8;
  stats::Moments half, one;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    const auto t = synthesize_ystar(incs, 25, r, 32);
    half.add(t.values[16]);
    one.add(t.values[32]);
  }
  EXPECT_NEAR(half.mean(), 0.5, 4 * half.mean_se());
  EXPECT_NEAR(half.variance(), expected, 4 * half.variance_se());
  EXPECT_LT(one.variance(), 1e-28);
  const auto s = synthesize_ystar(incs, 25, 1, 32, BridgeMode::shared);
  EXPECT_NEAR(s.values.back(), 1.0, 1e-14);
}

TEST(Ystar, BridgeIsExactAtFixedTimes) {
  // Var B(u) = u(1-u) for the standard bridge.
  rng::Engine eng = rng::engine(3);
  stats::Moments a, b;
  const std::vector<double> ts{0.3, 0.8};
  std::vector<double> out(2);
  for (int r = 0; r < 40000; ++r) {
    detail::bridge_at(ts, out, eng);
    a.add(out[0]);
    b.add(out[1]);
  }
  EXPECT_NEAR(a.variance(), 0.21, 4 * a.variance_se());
  EXPECT_NEAR(b.variance(), 0.16, 4 * b.variance_se());
}

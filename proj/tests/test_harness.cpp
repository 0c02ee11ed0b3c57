#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "lecam/harness.hpp"

using namespace lecam;

namespace {
const DensityModel kCosine = densities::from_spec("cosine");

double value(const TestReport& r, const std::string& key) {
  for (const auto& [k, v] : r.values)
    if (k == key) return v;
  return NAN;
}
}  // namespace

TEST(Sufficiency, UniformPasses) {
  const auto r = verify_sufficiency(densities::uniform(), 10000, 4, 1, 42);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.p_value, 1e-3);
}

TEST(Sufficiency, SingleCellAlwaysPasses) {
  const auto r = verify_sufficiency(kCosine, 100, 1, 1, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Sufficiency, WrongThetaIsDetected) {
  const auto r = verify_sufficiency(kCosine, 100000, 8, 1, 7, {}, densities::from_spec("cosine:0.25,0.1,0.05"));
  EXPECT_LT(r.p_value, 1e-6);
  EXPECT_FALSE(r.pass);
  VerifyOptions neg;
  neg.negative_control = true;
  EXPECT_FALSE(verify_sufficiency(densities::uniform(), 10000, 4, 1, 3, neg).pass);
}

TEST(Sufficiency, ThreadCountDoesNotChangeReport) {
  VerifyOptions one, many;
  many.threads = 4;
  const auto a = verify_sufficiency(kCosine, 2000, 8, 6, 5, one);
  const auto b = verify_sufficiency(kCosine, 2000, 8, 6, 5, many);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}

TEST(Transport, UniformAndCosinePass) {
  EXPECT_TRUE(verify_transport(densities::uniform(), 10000, 8, 1, 1).pass);
  EXPECT_TRUE(verify_transport(kCosine, 10000, 8, 1, 2).pass);
}

TEST(Transport, SkippingReconstructionFails) {
  VerifyOptions neg;
  neg.negative_control = true;
  const auto r = verify_transport(kCosine, 10000, 8, 1, 2, neg);
  EXPECT_FALSE(r.pass);
  EXPECT_LT(r.p_value, 1e-10);
}

TEST(YstarMoments, HoldAtSmallM) {
  const auto r = verify_ystar_moments(kCosine, 100, 2, 10000, 9);
  EXPECT_TRUE(r.pass) << r.to_json().dump();
}

TEST(YstarMoments, VarianceAtOneIsQuarterOverN) {
  const auto r = verify_ystar_moments(densities::uniform(), 100, 4, 10000, 3);
  EXPECT_TRUE(r.pass);
  EXPECT_DOUBLE_EQ(value(r, "var_t1_expected"), 0.0025);
  EXPECT_NEAR(value(r, "mean_t1_expected"), 1.0, 1e-14);
}

TEST(YstarMoments, DroppingBridgeFails) {
  VerifyOptions neg;
  neg.negative_control = true;
  EXPECT_FALSE(verify_ystar_moments(kCosine, 100, 8, 10000, 9, neg).pass);
}

TEST(TransferRule, IdentityKernelKeepsRule) {
  const auto rule = first_cell_fraction_rule(4, 2);
  const auto id = identity_kernel<std::vector<double>>(spaces::unit_interval(4));
  const auto moved = transfer_rule(rule, id);
  const std::vector<double> y{0.1, 0.2, 0.7, 0.9};
  EXPECT_EQ(moved(y, 1), rule(y, 1));
}

TEST(TransferRule, DeterministicKernelComposes) {
  // pi_1 = pi_2 o S with S(y) = 1 - y.
  const auto rule = first_cell_fraction_rule(3, 4);
  const auto flip = deterministic_kernel<std::vector<double>, std::vector<double>>(
      spaces::unit_interval(3), spaces::unit_interval(3), [](const std::vector<double>& y) {
        std::vector<double> out;
        for (double v : y) out.push_back(1.0 - v);
        return out;
      });
  const auto moved = transfer_rule(rule, flip);
  EXPECT_DOUBLE_EQ(moved({0.9, 0.95, 0.1}, 0), 2.0 / 3.0);
}

TEST(TransferRule, SpaceMismatchIsUsageError) {
  const auto rule = first_cell_fraction_rule(5, 4);
  EXPECT_THROW(transfer_rule(rule, transport_chain(4, 6)), usage_error);
}

TEST(RiskTransfer, ThetaOneProblemHolds) {
  const auto r = verify_risk_transfer(theta1_problem(1000, 16), kCosine, 1000, 16, 4000, 11);
  EXPECT_TRUE(r.pass) << r.to_json().dump();
}

TEST(RiskTransfer, ConstantRuleHasZeroGap) {
  const auto r = verify_risk_transfer(theta1_problem(500, 8), kCosine, 500, 8, 200, 1, {}, constant_rule(500, 0.3));
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(RiskTransfer, TentSpanDensityHasZeroBound) {
  // A piecewise-linear density in the tent span is reproduced exactly.
  const auto r = verify_risk_transfer(theta1_problem(200, 4), densities::uniform(), 200, 4, 2000, 4);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(value(r, "tv_bound"), 1e-10);
}

TEST(RiskTransfer, LossOutsideUnitIntervalIsRejected) {
  DecisionProblem p = theta1_problem(100, 4);
  p.loss = [](double, double) { return 2.0; };
  EXPECT_THROW(verify_risk_transfer(p, kCosine, 100, 4, 10, 1), domain_error);
}

TEST(RateSweep, NeedsFourPoints) {
  EXPECT_THROW(rate_sweep(kCosine, 1.0, {1024, 2048, 4096}), usage_error);
}

TEST(RateSweep, UniformIsExactZero) {
  const auto s = rate_sweep(densities::uniform(), 1.0, {1024, 2048, 4096, 8192});
  EXPECT_TRUE(s.exact_zero);
  EXPECT_FALSE(s.fit.has_value());
  EXPECT_TRUE(s.pass());
  for (const auto& r : s.rows) EXPECT_EQ(r.measured, 0.0);
}

TEST(RateSweep, SingleFrequencyCosineDecreases) {
  std::vector<std::size_t> grid;
  for (int k = 10; k <= 18; ++k) grid.push_back(std::size_t{1} << k);
  const auto s = rate_sweep(densities::from_spec("cosine:0.3"), 1.0, grid);
  for (std::size_t i = 1; i < s.rows.size(); ++i) EXPECT_LT(s.rows[i].measured, s.rows[i - 1].measured);
  EXPECT_TRUE(s.pass());
}

TEST(RateSweep, DefaultCosineFollowsPredictedSlope) {
  std::vector<std::size_t> grid;
  for (int k = 10; k <= 18; ++k) grid.push_back(std::size_t{1} << k);
  const auto s = rate_sweep(kCosine, 1.0, grid);
  // From 2^10 to 2^11 the floor moves m only from 10 to 12, too small a step
  // to beat the doubled sqrt(n) before the asymptotic regime; from there on
  // the column decreases.
  EXPECT_GT(s.rows[1].measured, s.rows[0].measured);
  for (std::size_t i = 2; i < s.rows.size(); ++i) EXPECT_LT(s.rows[i].measured, s.rows[i - 1].measured);
  ASSERT_TRUE(s.fit.has_value());
  EXPECT_NEAR(s.expected_slope, 0.5 - 4.0 / 6.0, 1e-15);
  EXPECT_TRUE(s.pass()) << s.fit->slope;
  for (const auto& r : s.rows) {
    const RateParams p{.n = static_cast<double>(r.n), .m = static_cast<double>(r.m), .gamma = 1.0};
    EXPECT_EQ(r.bound, bound_density_reconstruction(p));
    EXPECT_EQ(r.m, choose_m(r.n, 1.0));
  }
}

TEST(RateSweep, AffineIsBoundaryDominated) {
  const auto s = rate_sweep(densities::affine(0.8), 1.0, {1024, 4096, 16384, 65536, 262144});
  EXPECT_EQ(s.hellinger_exponent, 3.0);
  EXPECT_TRUE(s.pass()) << s.fit->slope;
}

TEST(RateSweep, CsvContract) {
  const auto s = rate_sweep(densities::uniform(), 1.0, {8192, 1024, 2048, 4096});
  std::ostringstream os;
  write_sweep_csv(os, s);
  EXPECT_EQ(os.str(),
            "n,m,measured,bound,ratio\n"
            "1024,10,0,1.33192885125,0\n"
            "2048,12,0,1.40293178843,0\n"
            "4096,16,0,1.25,0\n"
            "8192,20,0,1.23820302123,0\n");
}

TEST(Report, JsonShape) {
  TestReport r;
  r.name = "x";
  r.pass = true;
  r.statistic = 1.0 / 3.0;
  r.set("k", 2.0);
  const auto j = r.to_json();
  EXPECT_EQ(j["test"], "x");
  EXPECT_TRUE(j["p_value"].is_null());
  EXPECT_EQ(j["statistic"].get<double>(), 0.333333333333);
  EXPECT_EQ(j["values"]["k"].get<double>(), 2.0);
}

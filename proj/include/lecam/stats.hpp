#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "lecam/error.hpp"

// Test statistics used by the verification harness.

namespace lecam::stats {

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  // Number of cells after merging sparse neighbours.
  std::size_t cells = 0;
  bool merged = false;
};

inline double chi_square_sf(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

namespace detail {

// Greedy left-to-right merge of adjacent cells until every group has weight
// >= min_weight; a light tail group joins its left neighbour. Returns the
// group index of each cell.
inline std::vector<std::size_t> merge_groups(std::span<const double> weight, double min_weight) {
  std::vector<std::size_t> group(weight.size());
  std::size_t g = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < weight.size(); ++i) {
    group[i] = g;
    acc += weight[i];
    if (acc >= min_weight && i + 1 < weight.size()) {
      ++g;
      acc = 0.0;
    }
  }
  // The last group is still open; fold it into its neighbour if too light.
  if (g > 0 && acc < min_weight)
    for (auto& x : group)
      if (x == g) x = g - 1;
  return group;
}

inline std::size_t group_count(const std::vector<std::size_t>& group) {
  return group.empty() ? 0 : group.back() + 1;
}

}  // namespace detail

// Pearson goodness of fit of observed counts against cell probabilities.
inline ChiSquareResult chi_square_gof(std::span<const std::size_t> observed, std::span<const double> probs,
                                      double min_expected = 5.0) {
  if (observed.size() != probs.size()) throw usage_error("chi_square_gof: size mismatch");
  const double n = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::size_t{0}));
  std::vector<double> expected(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) expected[i] = n * probs[i];
  const auto group = detail::merge_groups(expected, min_expected);
  const std::size_t k = detail::group_count(group);
  std::vector<double> o(k, 0.0), e(k, 0.0);
  for (std::size_t i = 0; i < group.size(); ++i) {
    o[group[i]] += static_cast<double>(observed[i]);
    e[group[i]] += expected[i];
  }
  ChiSquareResult r;
  r.cells = k;
  r.merged = k < probs.size();
  for (std::size_t j = 0; j < k; ++j)
    if (e[j] > 0.0) r.statistic += (o[j] - e[j]) * (o[j] - e[j]) / e[j];
  r.dof = static_cast<double>(k) - 1.0;
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

// Two-sample homogeneity test on a 2 x k contingency table.
inline ChiSquareResult chi_square_homogeneity(std::span<const std::size_t> a, std::span<const std::size_t> b,
                                              double min_expected = 5.0) {
  if (a.size() != b.size()) throw usage_error("chi_square_homogeneity: size mismatch");
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::size_t{0}));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::size_t{0}));
  const double total = na + nb;
  ChiSquareResult r;
  if (na == 0.0 || nb == 0.0) return r;
  // Smallest expected count in a column is min(na, nb) * column / total.
  std::vector<double> weight(a.size());
  const double scale = std::min(na, nb) / total;
  for (std::size_t i = 0; i < a.size(); ++i) weight[i] = scale * static_cast<double>(a[i] + b[i]);
  const auto group = detail::merge_groups(weight, min_expected);
  const std::size_t k = detail::group_count(group);
  std::vector<double> ca(k, 0.0), cb(k, 0.0);
  for (std::size_t i = 0; i < group.size(); ++i) {
    ca[group[i]] += static_cast<double>(a[i]);
    cb[group[i]] += static_cast<double>(b[i]);
  }
  r.cells = k;
  r.merged = k < a.size();
  for (std::size_t j = 0; j < k; ++j) {
    const double col = ca[j] + cb[j];
    if (col == 0.0) continue;
    const double ea = na * col / total;
    const double eb = nb * col / total;
    r.statistic += (ca[j] - ea) * (ca[j] - ea) / ea + (cb[j] - eb) * (cb[j] - eb) / eb;
  }
  r.dof = static_cast<double>(k) - 1.0;
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

// Survival function of the Kolmogorov distribution, P(K > lambda).
inline double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Theta-function form, fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      s += std::exp(-j * j * pi2 / (8.0 * lambda * lambda));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? term : -term);
    if (term < 1e-300) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// One-sample Kolmogorov-Smirnov test against a continuous CDF. The p-value
// uses the Kolmogorov limit with Stephens' finite-n correction.
template <class Cdf>
KsResult ks_test(std::vector<double> sample, Cdf&& cdf) {
  KsResult r;
  r.n = sample.size();
  if (sample.empty()) return r;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    r.statistic = std::max({r.statistic, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  r.p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * r.statistic);
  return r;
}

// Running mean / variance / fourth central moment (Welford + Terriberry).
class Moments {
 public:
  void add(double x) {
    const double n1 = static_cast<double>(n_);
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double dn = delta / n;
    const double dn2 = dn * dn;
    const double term1 = delta * dn * n1;
    mean_ += dn;
    m4_ += term1 * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * m2_ - 4 * dn * m3_;
    m3_ += term1 * dn * (n - 2) - 3 * dn * m2_;
    m2_ += term1;
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance.
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double mean_se() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }
  // Standard error of the sample variance, sqrt((mu4 - sigma^4) / n).
  double variance_se() const {
    if (n_ < 2) return 0.0;
    const double n = static_cast<double>(n_);
    const double mu2 = m2_ / n;
    const double mu4 = m4_ / n;
    return std::sqrt(std::max(0.0, mu4 - mu2 * mu2) / n);
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

struct Covariance {
  double value = 0.0;
  double se = 0.0;
};

// Sample covariance of paired data and its standard error, from the
// spread of the centred products.
inline Covariance sample_covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw usage_error("sample_covariance: need >= 3 paired values");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  Moments prod;
  for (std::size_t i = 0; i < x.size(); ++i) prod.add((x[i] - mx) * (y[i] - my));
  return {prod.mean() * n / (n - 1.0), prod.mean_se()};
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Ordinary least squares y = a + b x with a 95% t-interval for b.
inline LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw usage_error("least_squares: need >= 3 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw usage_error("least_squares: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    ssr += r * r;
  }
  fit.slope_se = std::sqrt(ssr / (n - 2.0) / sxx);
  const double t = boost::math::quantile(boost::math::students_t(n - 2.0), 0.975);
  fit.ci_low = fit.slope - t * fit.slope_se;
  fit.ci_high = fit.slope + t * fit.slope_se;
  return fit;
}

}  // namespace lecam::stats

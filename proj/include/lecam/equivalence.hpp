#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include "lecam/density.hpp"
#include "lecam/error.hpp"
#include "lecam/experiments.hpp"

// Upper bounds for the Le Cam distance along the chain
//
//   iid density  <->  multinomial  <->  independent Gaussians
//                <->  Gaussian increments  <->  white noise
//
// Constants hidden in O(.) are unknown; every rate below carries a unit
// constant unless one is injected through RateParams.

namespace lecam {

struct RateParams {
  double n = 1.0;
  double m = 2.0;
  double gamma = 1.0;
  // Constant of the multinomial/Gaussian comparisons; depends on the ratio
  // bound max theta / min theta, which the class controls through M / eps.
  double carter_constant = 1.0;
  // Multiplier for the sqrt(n)(m^{-3/2} + m^{-1-gamma}) links.
  double class_constant = 1.0;

  void validate() const {
    if (!(n >= 1.0)) throw usage_error("rate params: n must be >= 1");
    if (!(m >= 2.0)) throw usage_error("rate params: m must be >= 2");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw usage_error("rate params: gamma must lie in (0,1]");
    if (!(carter_constant > 0.0) || !(class_constant > 0.0)) throw usage_error("rate params: constants must be positive");
  }
};

// Per-link bounds. The forward direction iid -> counts is exact (binning is
// sufficient) and costs nothing; the density_multinomial field carries the
// reverse direction, i.e. the reconstruction cost.
struct ChainBound {
  double n = 0.0;
  double m = 0.0;
  double density_multinomial = 0.0;
  double multinomial_gaussian = 0.0;
  double coords_increments = 0.0;
  double increments_white_noise = 0.0;

  double total() const {
    return density_multinomial + multinomial_gaussian + coords_increments + increments_white_noise;
  }
};

// sqrt(n) (m^{-3/2} + m^{-1-gamma})
inline double bound_density_reconstruction(const RateParams& p) {
  p.validate();
  return p.class_constant * std::sqrt(p.n) * (std::pow(p.m, -1.5) + std::pow(p.m, -1.0 - p.gamma));
}

// C m ln m / sqrt(n): multinomial vs. Gaussian with matching covariance.
inline double bound_carter_multinomial(const RateParams& p) {
  p.validate();
  return p.carter_constant * p.m * std::log(p.m) / std::sqrt(p.n);
}

// C m / sqrt(n): correlated vs. independent Gaussian coordinates.
inline double bound_carter_independent(const RateParams& p) {
  p.validate();
  return p.carter_constant * p.m / std::sqrt(p.n);
}

// Computable bound between N(sqrt(theta_i/m), 1/(4nm)) and
// N(\int_{J_i} sqrt f, 1/(4nm)):
//   sqrt(2mn) sqrt(sum_i (\int_{J_i} sqrt f - sqrt(theta_i / m))^2).
inline double bound_gaussian_link(const RateParams& p, const DensityModel& f) {
  p.validate();
  const auto m = static_cast<std::size_t>(p.m);
  const ThetaVector theta = theta_of(f, m);
  const auto roots = sqrt_cell_integrals(f, m);
  // Both integrals carry up to abs_tol of quadrature error; a smaller gap
  // is unresolved and counts as zero.
  const double floor = 2.0 * detail::cell_quadrature().abs_tol;
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = roots[i] - std::sqrt(theta[i] / p.m);
    if (std::abs(d) > floor) s += d * d;
  }
  return std::sqrt(2.0 * p.m * p.n) * std::sqrt(s);
}

// floor(n^{1/(2+gamma)}), at least 2.
inline std::size_t choose_m(std::size_t n, double gamma) {
  if (n < 2) throw usage_error("choose_m: n must be >= 2");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw usage_error("choose_m: gamma must lie in (0,1]");
  const double raw = std::pow(static_cast<double>(n), 1.0 / (2.0 + gamma));
  // Guard against pow landing a hair below an exact integer.
  auto m = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::max<std::size_t>(m, 2);
}

inline ChainBound chain_bound(std::size_t n, std::size_t m, double gamma, double carter_constant = 1.0,
                              double class_constant = 1.0) {
  const RateParams p{.n = static_cast<double>(n),
                     .m = static_cast<double>(m),
                     .gamma = gamma,
                     .carter_constant = carter_constant,
                     .class_constant = class_constant};
  ChainBound b;
  b.n = p.n;
  b.m = p.m;
  b.density_multinomial = bound_density_reconstruction(p);
  b.multinomial_gaussian = bound_carter_multinomial(p) + bound_carter_independent(p);
  b.coords_increments = bound_density_reconstruction(p);
  b.increments_white_noise = bound_density_reconstruction(p);
  return b;
}

// All links at m = choose_m(n, gamma).
inline ChainBound total_bound(std::size_t n, double gamma, double carter_constant = 1.0) {
  return chain_bound(n, choose_m(n, gamma), gamma, carter_constant);
}

// Grid search of the total over m in [2, max_m] (default: [2, n]).
inline ChainBound optimal_chain_bound(std::size_t n, double gamma, double carter_constant = 1.0,
                                      std::size_t max_m = 0) {
  if (n < 2) throw usage_error("optimal_chain_bound: n must be >= 2");
  if (max_m == 0) max_m = n;
  ChainBound best;
  double best_total = std::numeric_limits<double>::infinity();
  for (std::size_t m = 2; m <= max_m; ++m) {
    const ChainBound b = chain_bound(n, m, gamma, carter_constant);
    if (b.total() < best_total) {
      best_total = b.total();
      best = b;
    }
  }
  return best;
}

// The stated overall rate: n^{-gamma/(2(gamma+2))} log n for gamma <= 1/2,
// n^{-1/10} log n above.
inline double stated_rate(std::size_t n, double gamma) {
  const double nd = static_cast<double>(n);
  const double exponent = gamma <= 0.5 ? gamma / (2.0 * (gamma + 2.0)) : 0.1;
  return std::pow(nd, -exponent) * std::log(nd);
}

}  // namespace lecam

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lecam/density.hpp"
#include "lecam/error.hpp"
#include "lecam/experiments.hpp"
#include "lecam/measures.hpp"
#include "lecam/quadrature.hpp"
#include "lecam/tent.hpp"

// Tent reconstruction fhat_m = sum_j theta_j V_j of a density and the
// error estimates that control the reconstruction step.

namespace lecam {

struct ErrorBreakdown {
  // \int (f - fhat)^2
  double l2_sq = 0.0;
  // \int (sqrt f - sqrt fhat)^2 by direct quadrature
  double hellinger_sq = 0.0;
  // l2_sq / (4 eps), which dominates hellinger_sq for f >= eps
  double hellinger_sq_bound = 0.0;
  // max over interior cells of the Taylor remainder sup norm
  double sup_remainder = 0.0;
  double abs_error = 0.0;
};

inline PiecewiseLinear reconstruct_from_theta(const ThetaVector& theta) {
  return PiecewiseLinear::from_tent_weights(theta.theta);
}

inline PiecewiseLinear reconstruct(const DensityModel& f, std::size_t m) {
  return reconstruct_from_theta(theta_of(f, m));
}

// sum_i (\int_{J_i} sqrt f) V_i, the drift of the synthesized y* process.
// Not a density: its knot values are m \int_{J_i} sqrt f.
inline PiecewiseLinear reconstruct_sqrt(const DensityModel& f, std::size_t m) {
  return PiecewiseLinear::from_tent_weights(sqrt_cell_integrals(f, m));
}

namespace detail {

inline quad::Options error_quadrature() { return {.abs_tol = 1e-16, .rel_tol = 1e-10, .initial_panels = 8}; }

// Breakpoints: cell edges i/m, reconstruction knots, and the density's kinks.
inline std::vector<double> reconstruction_breakpoints(const DensityModel& f, const PiecewiseLinear& g,
                                                      std::size_t m) {
  std::vector<double> edges;
  for (std::size_t i = 1; i < m; ++i) edges.push_back(cell_lo(i, m));
  edges.insert(edges.end(), g.knots().begin(), g.knots().end());
  return quad::merge_breakpoints(edges, f.kinks, 0.0, 1.0);
}

}  // namespace detail

// \int_0^1 (f - fhat_m)^2 with panels aligned to the knots.
inline quad::Result l2_error_sq_detail(const DensityModel& f, std::size_t m) {
  const PiecewiseLinear g = reconstruct(f, m);
  const auto bps = detail::reconstruction_breakpoints(f, g, m);
  auto sq = [&](double x) {
    const double d = f(x) - g(x);
    return d * d;
  };
  const auto r = quad::simpson(sq, bps, detail::error_quadrature());
  if (!r.converged) throw numerical_error("l2_error_sq: quadrature did not converge");
  return r;
}

inline double l2_error_sq(const DensityModel& f, std::size_t m) { return l2_error_sq_detail(f, m).value; }

// The two boundary pieces \int_0^{1/(2m)} (f - m theta_1)^2 and
// \int_{1-1/(2m)}^1 (f - m theta_m)^2, where the reconstruction is flat.
inline double boundary_l2_sq(const DensityModel& f, std::size_t m) {
  const ThetaVector theta = theta_of(f, m);
  const double md = static_cast<double>(m);
  const double left = md * theta.theta.front();
  const double right = md * theta.theta.back();
  const auto opt = detail::error_quadrature();
  const double a = quad::simpson([&](double x) { return (f(x) - left) * (f(x) - left); }, 0.0, 0.5 / md, opt).value;
  const double b =
      quad::simpson([&](double x) { return (f(x) - right) * (f(x) - right); }, 1.0 - 0.5 / md, 1.0, opt).value;
  return a + b;
}

// Hellinger^2 between f and its reconstruction.
inline DistanceReport hellinger_sq_reconstruction(const DensityModel& f, std::size_t m) {
  const PiecewiseLinear g = reconstruct(f, m);
  if (g.min_value() < 0.0) throw domain_error("reconstruction went negative");
  const auto bps = detail::reconstruction_breakpoints(f, g, m);
  return hellinger_sq_quadrature(f.eval, g, 0.0, 1.0, bps, 8, detail::error_quadrature());
}

// sup over J_i of |f(x) - f(x_i*) - f'(x_i*)(x - x_i*)|, on a grid of 1024
// points per cell. i is 0-based. The class bound K m^{-1-gamma} is only
// claimed for interior cells 1..m-2; the end cells are allowed for
// diagnostics.
inline double remainder_sup(const DensityModel& f, std::size_t m, std::size_t i, std::size_t grid = 1024) {
  if (m < 2 || i >= m) throw usage_error("remainder_sup: cell index out of range");
  const double c = midpoint(i, m);
  const double fc = f(c);
  const double dfc = f.derivative_at(c);
  const double lo = cell_lo(i, m);
  const double width = 1.0 / static_cast<double>(m);
  double sup = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double x = lo + width * static_cast<double>(k) / static_cast<double>(grid - 1);
    sup = std::max(sup, std::abs(f(x) - fc - dfc * (x - c)));
  }
  return sup;
}

// K m^{-1-gamma}: the class bound on interior Taylor remainders.
inline double remainder_bound(const HolderClass& cls, std::size_t m) {
  return cls.K * std::pow(static_cast<double>(m), -1.0 - cls.gamma);
}

inline ErrorBreakdown hellinger_bound(const DensityModel& f, std::size_t m) {
  if (!(f.cls.eps > 0.0)) throw domain_error("hellinger_bound: eps must be positive");
  const auto l2 = l2_error_sq_detail(f, m);
  const auto h = hellinger_sq_reconstruction(f, m);
  ErrorBreakdown out;
  out.l2_sq = l2.value;
  out.hellinger_sq = h.value;
  out.hellinger_sq_bound = l2.value / (4.0 * f.cls.eps);
  out.abs_error = l2.abs_error + h.abs_error;
  for (std::size_t i = 1; i + 1 < m; ++i) out.sup_remainder = std::max(out.sup_remainder, remainder_sup(f, m, i));
  return out;
}

// Class of sqrt f. Two constants for the Hölder modulus of (sqrt f)' are in
// circulation: K / sqrt(eps) and K sqrt(M) / sqrt(eps). `conservative`
// returns the larger.
enum class SqrtClassVariant { k_over_sqrt_eps, k_sqrt_m_over_sqrt_eps, conservative };

inline HolderClass sqrt_class_params(const HolderClass& cls,
                                     SqrtClassVariant variant = SqrtClassVariant::k_over_sqrt_eps) {
  cls.validate();
  const double a = cls.K / std::sqrt(cls.eps);
  const double b = cls.K * std::sqrt(cls.M) / std::sqrt(cls.eps);
  double K = a;
  if (variant == SqrtClassVariant::k_sqrt_m_over_sqrt_eps) K = b;
  if (variant == SqrtClassVariant::conservative) K = std::max(a, b);
  return {.gamma = cls.gamma, .K = K, .eps = std::sqrt(cls.eps), .M = std::sqrt(cls.M)};
}

// sqrt f as a density-like model carrying the mapped class. It does not
// integrate to one; use it for remainder and Hölder checks only.
inline DensityModel sqrt_model(const DensityModel& f,
                               SqrtClassVariant variant = SqrtClassVariant::conservative) {
  DensityModel r;
  r.name = "sqrt(" + f.name + ")";
  r.eval = [fe = f.eval](double x) { return std::sqrt(fe(x)); };
  r.derivative = [f](double x) { return f.derivative_at(x) / (2.0 * std::sqrt(f(x))); };
  r.cls = sqrt_class_params(f.cls, variant);
  r.kinks = f.kinks;
  return r;
}

}  // namespace lecam

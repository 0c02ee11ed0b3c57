#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "lecam/error.hpp"
#include "lecam/experiments.hpp"

namespace lecam {

// The tent basis V_1..V_m on [0,1] (indices are 0-based in code).
//
// With h = 1/m and x_j* = (2j+1)/(2m):
//   - interior V_j is the triangle of height m on [x_{j-1}*, x_{j+1}*],
//     peaking at x_j*;
//   - V_0 equals m on [0, x_0*] and falls linearly to 0 at x_1*;
//   - V_{m-1} mirrors V_0.
// Each V_j is a probability density, sum_j V_j = m on [0,1], and
// V_j(x_i*) = m delta_ij.
class TentBasis {
 public:
  explicit TentBasis(std::size_t m) : m_(m) {
    if (m < 2) throw usage_error("tent_basis: m must be >= 2");
  }

  std::size_t size() const { return m_; }
  double knot(std::size_t j) const { return midpoint(j, m_); }

  double value(std::size_t j, double x) const {
    check(j);
    const double md = static_cast<double>(m_);
    const double c = knot(j);
    if (j == 0 && x <= c) return x >= 0.0 ? md : 0.0;
    if (j == m_ - 1 && x >= c) return x <= 1.0 ? md : 0.0;
    const double d = std::abs(x - c) * md;  // distance in units of h
    return d < 1.0 ? md * (1.0 - d) : 0.0;
  }

  // \int_0^t V_j, piecewise quadratic; the CDF of the density V_j.
  double cdf(std::size_t j, double t) const {
    check(j);
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double md = static_cast<double>(m_);
    const double c = knot(j);
    if (j == 0) {
      if (t <= c) return md * t;
      const double r = std::max(0.0, c + 1.0 / md - t);  // distance to right foot
      return 1.0 - 0.5 * md * md * r * r;
    }
    if (j == m_ - 1) return 1.0 - cdf(0, 1.0 - t);
    const double left = c - 1.0 / md;
    const double right = c + 1.0 / md;
    if (t <= left) return 0.0;
    if (t >= right) return 1.0;
    if (t <= c) return 0.5 * md * md * (t - left) * (t - left);
    return 1.0 - 0.5 * md * md * (right - t) * (right - t);
  }

  // Inverse of cdf(j, .) on (0,1).
  double quantile(std::size_t j, double u) const {
    check(j);
    u = std::clamp(u, 0.0, 1.0);
    const double md = static_cast<double>(m_);
    const double c = knot(j);
    if (j == 0) {
      if (u <= 0.5) return u / md;
      return c + 1.0 / md - std::sqrt(2.0 * (1.0 - u)) / md;
    }
    if (j == m_ - 1) return 1.0 - quantile(0, 1.0 - u);
    if (u <= 0.5) return c - 1.0 / md + std::sqrt(2.0 * u) / md;
    return c + 1.0 / md - std::sqrt(2.0 * (1.0 - u)) / md;
  }

  // Support [lo, hi] of V_j.
  std::pair<double, double> support(std::size_t j) const {
    check(j);
    const double h = 1.0 / static_cast<double>(m_);
    return {j == 0 ? 0.0 : knot(j) - h, j == m_ - 1 ? 1.0 : knot(j) + h};
  }

  // Knots 0, x_0*, ..., x_{m-1}*, 1 of the piecewise-linear span.
  std::vector<double> knots() const {
    std::vector<double> k{0.0};
    for (std::size_t j = 0; j < m_; ++j) k.push_back(knot(j));
    k.push_back(1.0);
    return k;
  }

 private:
  void check(std::size_t j) const {
    if (j >= m_) throw usage_error("tent_basis: index out of range");
  }

  std::size_t m_;
};

inline TentBasis tent_basis(std::size_t m) { return TentBasis(m); }

// Continuous piecewise-linear function on [0,1] given by its values at
// sorted knots (first knot 0, last knot 1).
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
      : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.size() != values_.size() || knots_.size() < 2)
      throw usage_error("piecewise linear: need matching knots and values");
    if (knots_.front() != 0.0 || knots_.back() != 1.0 || !std::is_sorted(knots_.begin(), knots_.end()))
      throw usage_error("piecewise linear: knots must be sorted and span [0,1]");
  }

  // sum_j w_j V_j. Knot values are m w_j at x_j*, m w_0 at 0 and m w_{m-1} at 1.
  static PiecewiseLinear from_tent_weights(std::span<const double> weights) {
    const std::size_t m = weights.size();
    const TentBasis basis(m);
    const double md = static_cast<double>(m);
    std::vector<double> values{md * weights.front()};
    for (double w : weights) values.push_back(md * w);
    values.push_back(md * weights.back());
    return PiecewiseLinear(basis.knots(), std::move(values));
  }

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double x) const {
    if (x <= 0.0) return x < 0.0 ? 0.0 : values_.front();
    if (x >= 1.0) return x > 1.0 ? 0.0 : values_.back();
    const std::size_t k = segment(x);
    const double t = (x - knots_[k]) / (knots_[k + 1] - knots_[k]);
    return values_[k] + t * (values_[k + 1] - values_[k]);
  }

  // Exact trapezoid sum.
  double integral() const { return cdf(1.0); }

  // \int_0^x, piecewise quadratic.
  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    x = std::min(x, 1.0);
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
      const double a = knots_[k];
      const double b = knots_[k + 1];
      if (x >= b) {
        acc += 0.5 * (values_[k] + values_[k + 1]) * (b - a);
        continue;
      }
      acc += 0.5 * (values_[k] + (*this)(x)) * (x - a);
      break;
    }
    return acc;
  }

  double min_value() const { return *std::min_element(values_.begin(), values_.end()); }

 private:
  std::size_t segment(double x) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - knots_.begin());
    return std::min(k == 0 ? 0 : k - 1, knots_.size() - 2);
  }

  std::vector<double> knots_;
  std::vector<double> values_;
};

}  // namespace lecam

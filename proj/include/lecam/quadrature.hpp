#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "lecam/error.hpp"

namespace lecam::quad {

struct Options {
  // Refinement stops once two successive estimates differ by less than
  // max(abs_tol, rel_tol * |estimate|).
  double abs_tol = 1e-9;
  double rel_tol = 0.0;
  // Simpson panels (pairs of subintervals) on the first pass of a segment.
  std::size_t initial_panels = 8;
  std::size_t max_panels = std::size_t{1} << 20;
  // Throw numerical_error instead of returning an unconverged result.
  bool throw_on_failure = false;
};

struct Result {
  double value = 0.0;
  // Last difference between successive refinements, summed over segments.
  double abs_error = 0.0;
  std::size_t panels = 0;
  bool converged = true;
};

// Composite Simpson on [a,b] with dyadic refinement. Each doubling reuses
// every previous function evaluation (trapezoid sums + midpoint sums).
template <class F>
Result simpson(F&& f, double a, double b, const Options& opt = {}) {
  if (!(b >= a)) throw usage_error("simpson: reversed interval");
  if (opt.initial_panels < 1) throw usage_error("simpson: need at least one panel");
  Result out;
  if (b == a) return out;

  // Start with 2*initial_panels subintervals.
  std::size_t intervals = 2 * opt.initial_panels;
  double h = (b - a) / static_cast<double>(intervals);
  double endpoint_sum = f(a) + f(b);
  double odd_sum = 0.0;   // interior points at odd indices
  double even_sum = 0.0;  // interior points at even indices
  for (std::size_t k = 1; k < intervals; ++k) {
    const double v = f(a + static_cast<double>(k) * h);
    (k % 2 ? odd_sum : even_sum) += v;
  }
  double estimate = h / 3.0 * (endpoint_sum + 4.0 * odd_sum + 2.0 * even_sum);
  double delta = 0.0;

  for (;;) {
    if (intervals / 2 >= opt.max_panels) {
      out.converged = false;
      break;
    }
    // Old odd + even points all become even points of the refined rule.
    even_sum += odd_sum;
    odd_sum = 0.0;
    const std::size_t old_intervals = intervals;
    intervals *= 2;
    h *= 0.5;
    for (std::size_t k = 0; k < old_intervals; ++k)
      odd_sum += f(a + (2.0 * static_cast<double>(k) + 1.0) * h);
    const double refined = h / 3.0 * (endpoint_sum + 4.0 * odd_sum + 2.0 * even_sum);
    delta = std::abs(refined - estimate);
    estimate = refined;
    if (delta < std::max(opt.abs_tol, opt.rel_tol * std::abs(estimate))) break;
  }

  out.value = estimate;
  out.abs_error = delta;
  out.panels = intervals / 2;
  if (!out.converged && opt.throw_on_failure) {
    std::ostringstream msg;
    msg << "simpson: no convergence on [" << a << ", " << b << "] after " << out.panels
        << " panels, last delta " << delta;
    throw numerical_error(msg.str());
  }
  return out;
}

// Integrates over [front, back] of a sorted breakpoint list, treating every
// breakpoint as a panel boundary. The absolute tolerance is shared evenly
// between segments.
template <class F>
Result simpson(F&& f, std::span<const double> breakpoints, const Options& opt = {}) {
  if (breakpoints.size() < 2) throw usage_error("simpson: need at least two breakpoints");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
    throw usage_error("simpson: breakpoints must be sorted");
  Options seg = opt;
  seg.abs_tol = opt.abs_tol / static_cast<double>(breakpoints.size() - 1);
  Result total;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const Result r = simpson(f, breakpoints[i], breakpoints[i + 1], seg);
    total.value += r.value;
    total.abs_error += r.abs_error;
    total.panels += r.panels;
    total.converged = total.converged && r.converged;
  }
  return total;
}

// Sorted union of two breakpoint sets restricted to [lo, hi], with the
// endpoints included.
inline std::vector<double> merge_breakpoints(std::span<const double> a, std::span<const double> b,
                                             double lo, double hi) {
  std::vector<double> out{lo, hi};
  for (double x : a)
    if (x > lo && x < hi) out.push_back(x);
  for (double x : b)
    if (x > lo && x < hi) out.push_back(x);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace lecam::quad

#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lecam/error.hpp"
#include "lecam/quadrature.hpp"

namespace lecam {

// Parameters of the Hölder class F(gamma, K, eps, M) of C^1 densities on
// [0,1] with eps <= f <= M and |f'(x) - f'(y)| <= K |x - y|^gamma.
struct HolderClass {
  double gamma = 1.0;
  double K = 1.0;
  double eps = 0.5;
  double M = 2.0;

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw usage_error("class: gamma must lie in (0,1]");
    if (!(K > 0.0)) throw usage_error("class: K must be positive");
    if (!(eps > 0.0)) throw usage_error("class: eps must be positive");
    if (!(M >= eps)) throw usage_error("class: M must be >= eps");
  }
};

// A density on [0,1] given by pointwise evaluation, tagged with the class
// it is claimed to belong to.
struct DensityModel {
  std::string name;
  std::function<double(double)> eval;
  // Optional analytic derivative; central differences are used otherwise.
  std::function<double(double)> derivative;
  HolderClass cls;
  // Points where the density is not smooth; used as quadrature breakpoints.
  std::vector<double> kinks;

  double operator()(double x) const { return eval(x); }

  double derivative_at(double x) const {
    if (derivative) return derivative(x);
    constexpr double step = 1e-6;
    const double lo = std::max(0.0, x - step);
    const double hi = std::min(1.0, x + step);
    return (eval(hi) - eval(lo)) / (hi - lo);
  }
};

struct ClassCheck {
  double min_value = 0.0;
  double max_value = 0.0;
  double integral = 0.0;
  // max over sampled pairs of |f'(x)-f'(y)| / (K |x-y|^gamma); <= 1 for members.
  double holder_ratio = 0.0;
  bool ok = false;
  std::string diagnostic;
};

// Checks the class invariants on a dense grid: bounds at every grid point,
// unit mass by quadrature, and the Hölder condition on f' for grid pairs.
inline ClassCheck check_class(const DensityModel& f, std::size_t grid = 2001,
                              double mass_tol = 1e-8) {
  f.cls.validate();
  ClassCheck out;
  out.min_value = std::numeric_limits<double>::infinity();
  out.max_value = -std::numeric_limits<double>::infinity();
  std::vector<double> xs(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    xs[i] = static_cast<double>(i) / static_cast<double>(grid - 1);
    const double v = f(xs[i]);
    out.min_value = std::min(out.min_value, v);
    out.max_value = std::max(out.max_value, v);
  }
  std::vector<double> bps{0.0, 1.0};
  bps.insert(bps.end() - 1, f.kinks.begin(), f.kinks.end());
  std::sort(bps.begin(), bps.end());
  out.integral = quad::simpson(f.eval, bps, {.abs_tol = 1e-12}).value;

  // Spot-check Hölder on a coarser grid (quadratic in the number of points).
  constexpr std::size_t holder_grid = 129;
  std::vector<double> dfs(holder_grid);
  for (std::size_t i = 0; i < holder_grid; ++i)
    dfs[i] = f.derivative_at(static_cast<double>(i) / (holder_grid - 1));
  for (std::size_t i = 0; i < holder_grid; ++i)
    for (std::size_t j = i + 1; j < holder_grid; ++j) {
      const double dx = static_cast<double>(j - i) / (holder_grid - 1);
      const double r = std::abs(dfs[i] - dfs[j]) / (f.cls.K * std::pow(dx, f.cls.gamma));
      out.holder_ratio = std::max(out.holder_ratio, r);
    }

  std::ostringstream diag;
  const double slack = 1e-12;
  if (out.min_value < f.cls.eps - slack) diag << "density drops to " << out.min_value << " < eps; ";
  if (out.max_value > f.cls.M + slack) diag << "density reaches " << out.max_value << " > M; ";
  if (std::abs(out.integral - 1.0) > mass_tol) diag << "mass " << out.integral << " != 1; ";
  // Finite-difference derivatives carry O(1e-6) noise.
  if (out.holder_ratio > 1.0 + 1e-4) diag << "Hölder ratio " << out.holder_ratio << " > 1; ";
  out.diagnostic = diag.str();
  out.ok = out.diagnostic.empty();
  return out;
}

inline void require_class(const DensityModel& f) {
  const ClassCheck c = check_class(f);
  if (!c.ok) throw domain_error("density '" + f.name + "' violates its class: " + c.diagnostic);
}

namespace densities {

inline DensityModel uniform() {
  DensityModel f;
  f.name = "uniform";
  f.eval = [](double) { return 1.0; };
  f.derivative = [](double) { return 0.0; };
  f.cls = {.gamma = 1.0, .K = 1.0, .eps = 1.0, .M = 1.0};
  return f;
}

// f(x) = 1 + sum_k a_k cos(2 pi k x). Coefficients are scaled down so that
// sum |a_k| <= 1/2, which puts f in the class with eps = 1/2, M = 2 and
// K = sum |a_k| (2 pi k)^2 (a Lipschitz constant for f', hence a Hölder
// constant for every gamma <= 1 on [0,1]).
inline DensityModel cosine(std::vector<double> coeffs) {
  if (coeffs.empty()) throw usage_error("cosine: need at least one coefficient");
  double l1 = 0.0;
  for (double a : coeffs) l1 += std::abs(a);
  if (l1 > 0.5)
    for (double& a : coeffs) a *= 0.5 / l1;

  DensityModel f;
  std::ostringstream name;
  name << "cosine:";
  for (std::size_t k = 0; k < coeffs.size(); ++k) name << (k ? "," : "") << coeffs[k];
  f.name = name.str();
  constexpr double two_pi = 2.0 * std::numbers::pi;
  f.eval = [coeffs](double x) {
    double v = 1.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k)
      v += coeffs[k] * std::cos(two_pi * static_cast<double>(k + 1) * x);
    return v;
  };
  f.derivative = [coeffs](double x) {
    double v = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      const double w = two_pi * static_cast<double>(k + 1);
      v -= coeffs[k] * w * std::sin(w * x);
    }
    return v;
  };
  double K = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    const double w = two_pi * static_cast<double>(k + 1);
    K += std::abs(coeffs[k]) * w * w;
  }
  f.cls = {.gamma = 1.0, .K = K > 0.0 ? K : 1.0, .eps = 0.5, .M = 2.0};
  return f;
}

// f(x) = 1 + a (x - 1/2), |a| <= 1. f' is constant, so any K > 0 works.
inline DensityModel affine(double a) {
  if (std::abs(a) > 1.0) throw usage_error("affine: slope must satisfy |a| <= 1");
  DensityModel f;
  std::ostringstream name;
  name << "affine:" << a;
  f.name = name.str();
  f.eval = [a](double x) { return 1.0 + a * (x - 0.5); };
  f.derivative = [a](double) { return a; };
  f.cls = {.gamma = 1.0, .K = 1.0, .eps = 1.0 - std::abs(a) / 2.0, .M = 1.0 + std::abs(a) / 2.0};
  return f;
}

// alpha f + (1 - alpha) g, in the smallest class containing both.
inline DensityModel mixture(double alpha, const DensityModel& f, const DensityModel& g) {
  DensityModel h;
  h.name = "mixture";
  h.eval = [=, fe = f.eval, ge = g.eval](double x) { return alpha * fe(x) + (1 - alpha) * ge(x); };
  h.derivative = [=, fd = f, gd = g](double x) {
    return alpha * fd.derivative_at(x) + (1 - alpha) * gd.derivative_at(x);
  };
  h.cls = {.gamma = std::min(f.cls.gamma, g.cls.gamma),
           .K = alpha * f.cls.K + (1 - alpha) * g.cls.K,
           .eps = std::min(f.cls.eps, g.cls.eps),
           .M = std::max(f.cls.M, g.cls.M)};
  h.kinks = f.kinks;
  h.kinks.insert(h.kinks.end(), g.kinks.begin(), g.kinks.end());
  return h;
}

inline std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string_view item =
        text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty())
      throw usage_error("cannot parse number '" + std::string(item) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

// Default coefficients of the builtin "cosine" density.
inline constexpr std::array<double, 3> kDefaultCosine{0.3, 0.1, 0.05};

inline std::string catalog() { return "uniform | cosine[:a1,a2,a3] | affine:a"; }

// Parses "uniform", "cosine", "cosine:a1,a2,a3" or "affine:a".
inline DensityModel from_spec(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const std::string_view args =
      colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (head == "uniform" && args.empty()) return uniform();
  if (head == "cosine") {
    if (args.empty()) return cosine({kDefaultCosine.begin(), kDefaultCosine.end()});
    auto coeffs = parse_numbers(args);
    if (coeffs.size() > 3) throw usage_error("cosine: at most three coefficients");
    return cosine(std::move(coeffs));
  }
  if (head == "affine" && !args.empty()) {
    const auto a = parse_numbers(args);
    if (a.size() != 1) throw usage_error("affine: exactly one slope");
    return affine(a[0]);
  }
  throw usage_error("unknown density '" + std::string(spec) + "'; known: " + catalog());
}

}  // namespace densities
}  // namespace lecam

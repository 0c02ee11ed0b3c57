#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lecam/density.hpp"
#include "lecam/error.hpp"
#include "lecam/quadrature.hpp"

// Probability laws and the classical distance toolbox: Hellinger in closed
// form for Gaussians and products, total variation for finite supports, and
// a quadrature fallback for arbitrary densities.
//
// Conventions: H^2(P,Q) = \int (sqrt p - sqrt q)^2, so H^2 ranges over
// [0,2]; ||P - Q||_TV = L1/2 ranges over [0,1].

namespace lecam {

struct NormalSpec {
  double mean = 0.0;
  double variance = 1.0;

  void validate() const {
    if (!(variance > 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
      throw domain_error("normal: variance must be positive and finite");
  }
  double sd() const { return std::sqrt(variance); }
  double pdf(double x) const {
    const double z = (x - mean) / sd();
    return std::exp(-0.5 * z * z) / (sd() * std::sqrt(2.0 * std::numbers::pi));
  }
};

struct Atom {
  double point = 0.0;
  double mass = 0.0;
};

// Finite-support law. Atoms are kept sorted by point with duplicates merged.
class DiscreteLaw {
 public:
  DiscreteLaw() = default;

  explicit DiscreteLaw(std::vector<Atom> atoms) {
    std::map<double, double> merged;
    for (const Atom& a : atoms) {
      if (!(a.mass >= 0.0)) throw domain_error("discrete law: negative mass");
      merged[a.point] += a.mass;
    }
    double total = 0.0;
    for (const auto& [x, p] : merged) {
      atoms_.push_back({x, p});
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw domain_error("discrete law: masses must sum to 1");
  }

  DiscreteLaw(std::span<const double> points, std::span<const double> masses)
      : DiscreteLaw(zip(points, masses)) {}

  static DiscreteLaw point_mass(double x) { return DiscreteLaw({{x, 1.0}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }

  double mass_at(double x) const {
    const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                     [](const Atom& a, double v) { return a.point < v; });
    return it != atoms_.end() && it->point == x ? it->mass : 0.0;
  }

 private:
  static std::vector<Atom> zip(std::span<const double> points, std::span<const double> masses) {
    if (points.size() != masses.size()) throw usage_error("discrete law: size mismatch");
    std::vector<Atom> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = {points[i], masses[i]};
    return out;
  }

  std::vector<Atom> atoms_;
};

enum class Metric { tv, hellinger, hellinger_sq, l1, l2 };
enum class Method { closed_form, quadrature, monte_carlo };

constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::tv: return "tv";
    case Metric::hellinger: return "hellinger";
    case Metric::hellinger_sq: return "hellinger-sq";
    case Metric::l1: return "l1";
    case Metric::l2: return "l2";
  }
  return "?";
}

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::closed_form: return "closed_form";
    case Method::quadrature: return "quadrature";
    case Method::monte_carlo: return "monte_carlo";
  }
  return "?";
}

inline Metric parse_metric(std::string_view s) {
  for (Metric m : {Metric::tv, Metric::hellinger, Metric::hellinger_sq, Metric::l1, Metric::l2})
    if (s == to_string(m)) return m;
  throw usage_error("unknown metric '" + std::string(s) +
                    "'; known: tv | hellinger | hellinger-sq | l1 | l2");
}

struct DistanceReport {
  Metric metric = Metric::hellinger_sq;
  double value = 0.0;
  Method method = Method::closed_form;
  double abs_error = 0.0;
};

struct TvBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Hellinger^2 between two Gaussians:
//   2 [1 - sqrt(2 s1 s2 / (s1^2 + s2^2)) exp(-(m1 - m2)^2 / (4 (s1^2 + s2^2)))].
inline double hellinger_sq_normal(const NormalSpec& a, const NormalSpec& b) {
  a.validate();
  b.validate();
  const double vsum = a.variance + b.variance;
  const double dm = a.mean - b.mean;
  const double affinity = std::sqrt(2.0 * a.sd() * b.sd() / vsum) * std::exp(-dm * dm / (4.0 * vsum));
  return std::clamp(2.0 * (1.0 - affinity), 0.0, 2.0);
}

// Upper bound 2|1 - s1^2/s2^2| + (m1 - m2)^2 / (2 s2^2). Not symmetric.
inline double hellinger_sq_normal_upper(const NormalSpec& a, const NormalSpec& b) {
  a.validate();
  b.validate();
  const double dm = a.mean - b.mean;
  return 2.0 * std::abs(1.0 - a.variance / b.variance) + dm * dm / (2.0 * b.variance);
}

// Hellinger^2 of product measures from the per-coordinate values:
//   2 [1 - prod_j (1 - H_j^2 / 2)].
inline double hellinger_sq_product(std::span<const double> components) {
  double affinity = 1.0;
  for (double h : components) {
    if (!(h >= 0.0 && h <= 2.0)) throw domain_error("hellinger_sq_product: component outside [0,2]");
    affinity *= 1.0 - h / 2.0;
  }
  return std::clamp(2.0 * (1.0 - affinity), 0.0, 2.0);
}

// n identical coordinates; log1p keeps precision when h is tiny and n large.
inline double hellinger_sq_power(double h, std::size_t n) {
  if (!(h >= 0.0 && h <= 2.0)) throw domain_error("hellinger_sq_power: component outside [0,2]");
  if (h == 2.0) return n ? 2.0 : 0.0;
  const double log_aff = static_cast<double>(n) * std::log1p(-h / 2.0);
  return std::clamp(-2.0 * std::expm1(log_aff), 0.0, 2.0);
}

inline TvBounds tv_sandwich(double h_sq) {
  if (!(h_sq >= 0.0 && h_sq <= 2.0)) throw domain_error("tv_sandwich: H^2 outside [0,2]");
  return {h_sq / 2.0, std::sqrt(h_sq)};
}

namespace detail {

// Calls fn(p, q) for each point of the union of both supports.
template <class Fn>
void for_each_support_point(const DiscreteLaw& a, const DiscreteLaw& b, Fn&& fn) {
  const auto& xa = a.atoms();
  const auto& xb = b.atoms();
  std::size_t i = 0, j = 0;
  while (i < xa.size() || j < xb.size()) {
    if (j == xb.size() || (i < xa.size() && xa[i].point < xb[j].point)) {
      fn(xa[i++].mass, 0.0);
    } else if (i == xa.size() || xb[j].point < xa[i].point) {
      fn(0.0, xb[j++].mass);
    } else {
      fn(xa[i++].mass, xb[j++].mass);
    }
  }
}

}  // namespace detail

inline double tv_discrete(const DiscreteLaw& a, const DiscreteLaw& b) {
  double l1 = 0.0;
  detail::for_each_support_point(a, b, [&](double p, double q) { l1 += std::abs(p - q); });
  return std::min(1.0, 0.5 * l1);
}

inline double hellinger_sq_discrete(const DiscreteLaw& a, const DiscreteLaw& b) {
  double s = 0.0;
  detail::for_each_support_point(a, b, [&](double p, double q) {
    const double d = std::sqrt(p) - std::sqrt(q);
    s += d * d;
  });
  return std::min(2.0, s);
}

inline double l2_discrete(const DiscreteLaw& a, const DiscreteLaw& b) {
  double s = 0.0;
  detail::for_each_support_point(a, b, [&](double p, double q) { s += (p - q) * (p - q); });
  return std::sqrt(s);
}

inline DistanceReport distance_discrete(Metric metric, const DiscreteLaw& a, const DiscreteLaw& b) {
  DistanceReport r{.metric = metric, .method = Method::closed_form};
  switch (metric) {
    case Metric::tv: r.value = tv_discrete(a, b); break;
    case Metric::l1: r.value = 2.0 * tv_discrete(a, b); break;
    case Metric::l2: r.value = l2_discrete(a, b); break;
    case Metric::hellinger_sq: r.value = hellinger_sq_discrete(a, b); break;
    case Metric::hellinger: r.value = std::sqrt(hellinger_sq_discrete(a, b)); break;
  }
  return r;
}

// Quadrature of a pointwise distance integrand over [lo, hi]. Both densities
// must be nonnegative wherever they are evaluated. The breakpoints (kinks of
// either density) become panel boundaries.
template <class F, class G>
DistanceReport distance_quadrature(Metric metric, F&& f, G&& g, double lo, double hi,
                                   std::span<const double> breakpoints = {},
                                   std::size_t panels = 8, quad::Options opt = {}) {
  if (panels < 2) throw usage_error("distance_quadrature: panels must be >= 2");
  opt.initial_panels = panels;
  const auto bps = quad::merge_breakpoints(breakpoints, {}, lo, hi);
  auto integrand = [&](double x) {
    const double p = f(x);
    const double q = g(x);
    if (p < 0.0 || q < 0.0) throw domain_error("distance_quadrature: negative density value");
    switch (metric) {
      case Metric::tv:
      case Metric::l1: return std::abs(p - q);
      case Metric::l2: return (p - q) * (p - q);
      case Metric::hellinger:
      case Metric::hellinger_sq: {
        const double d = std::sqrt(p) - std::sqrt(q);
        return d * d;
      }
    }
    return 0.0;
  };
  const quad::Result q = quad::simpson(integrand, bps, opt);
  DistanceReport r{.metric = metric, .method = Method::quadrature, .abs_error = q.abs_error};
  switch (metric) {
    case Metric::tv:
      r.value = std::min(1.0, 0.5 * q.value);
      r.abs_error *= 0.5;
      break;
    case Metric::l1: r.value = q.value; break;
    case Metric::hellinger_sq: r.value = std::clamp(q.value, 0.0, 2.0); break;
    case Metric::l2:
    case Metric::hellinger: {
      const double v = std::max(0.0, q.value);
      r.value = std::sqrt(v);
      r.abs_error = v > 0.0 ? q.abs_error / (2.0 * r.value) : std::sqrt(q.abs_error);
      if (metric == Metric::hellinger) r.value = std::min(r.value, std::sqrt(2.0));
      break;
    }
  }
  return r;
}

template <class F, class G>
DistanceReport hellinger_sq_quadrature(F&& f, G&& g, double lo, double hi,
                                       std::span<const double> breakpoints = {},
                                       std::size_t panels = 8, quad::Options opt = {}) {
  return distance_quadrature(Metric::hellinger_sq, std::forward<F>(f), std::forward<G>(g), lo, hi,
                             breakpoints, panels, opt);
}

inline DistanceReport hellinger_sq_quadrature(const DensityModel& f, const DensityModel& g,
                                              std::size_t panels = 8, quad::Options opt = {}) {
  const auto bps = quad::merge_breakpoints(f.kinks, g.kinks, 0.0, 1.0);
  return hellinger_sq_quadrature(f.eval, g.eval, 0.0, 1.0, bps, panels, opt);
}

// Truncation window for Gaussian pairs: [min mean - 8 max sd, max mean + 8 max sd].
inline std::pair<double, double> normal_window(const NormalSpec& a, const NormalSpec& b) {
  const double s = std::max(a.sd(), b.sd());
  return {std::min(a.mean, b.mean) - 8.0 * s, std::max(a.mean, b.mean) + 8.0 * s};
}

// Points where the two Gaussian densities cross (kinks of |p - q|).
inline std::vector<double> normal_crossings(const NormalSpec& a, const NormalSpec& b) {
  // log p - log q = A x^2 + B x + C.
  const double A = 0.5 / b.variance - 0.5 / a.variance;
  const double B = a.mean / a.variance - b.mean / b.variance;
  const double C = 0.5 * b.mean * b.mean / b.variance - 0.5 * a.mean * a.mean / a.variance +
                   0.5 * std::log(b.variance / a.variance);
  if (std::abs(A) < 1e-15) {
    if (B == 0.0) return {};
    return {-C / B};
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return {};
  const double r = std::sqrt(disc);
  return {(-B - r) / (2.0 * A), (-B + r) / (2.0 * A)};
}

inline DistanceReport distance_normal(Metric metric, const NormalSpec& a, const NormalSpec& b,
                                      quad::Options opt = {.abs_tol = 1e-12}) {
  a.validate();
  b.validate();
  if (metric == Metric::hellinger_sq) return {metric, hellinger_sq_normal(a, b), Method::closed_form, 0.0};
  if (metric == Metric::hellinger)
    return {metric, std::sqrt(hellinger_sq_normal(a, b)), Method::closed_form, 0.0};
  const auto [lo, hi] = normal_window(a, b);
  std::vector<double> bps{a.mean, b.mean};
  if (metric == Metric::tv || metric == Metric::l1) {
    const auto cross = normal_crossings(a, b);
    bps.insert(bps.end(), cross.begin(), cross.end());
    std::sort(bps.begin(), bps.end());
  }
  return distance_quadrature(
      metric, [&](double x) { return a.pdf(x); }, [&](double x) { return b.pdf(x); }, lo, hi, bps, 16,
      opt);
}

}  // namespace lecam

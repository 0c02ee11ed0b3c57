#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lecam/density.hpp"
#include "lecam/error.hpp"
#include "lecam/format.hpp"
#include "lecam/quadrature.hpp"
#include "lecam/rng.hpp"

// The experiments of the density-estimation / white-noise chain, all indexed
// by the same density f:
//
//   iid_density          n i.i.d. draws from f
//   multinomial          bin counts M(n; theta_1..theta_m), theta_i = \int_{J_i} f
//   midpoint             n i.i.d. draws of X* (mass theta_i at x_i* = (2i-1)/(2m))
//   reconstructed        n i.i.d. draws from the tent reconstruction of f
//   gaussian_coords      m independent N(sqrt(theta_i / m), 1/(4nm))
//   gaussian_increments  m independent N(\int_{J_i} sqrt f, 1/(4nm))
//   white_noise          dy_t = sqrt f(t) dt + dW_t / (2 sqrt n) on a uniform grid
//
// with J_i = [(i-1)/m, i/m].

namespace lecam {

enum class ExperimentKind {
  iid_density,
  multinomial,
  midpoint,
  reconstructed,
  gaussian_coords,
  gaussian_increments,
  white_noise,
};

struct ExperimentId {
  ExperimentKind kind = ExperimentKind::iid_density;
  std::size_t n = 1;
  std::size_t m = 2;
  std::size_t grid_resolution = 0;

  void validate() const {
    if (n < 1) throw usage_error("experiment: n must be >= 1");
    if (kind != ExperimentKind::iid_density && m < 2) throw usage_error("experiment: m must be >= 2");
    if (kind == ExperimentKind::white_noise && grid_resolution < m)
      throw usage_error("experiment: grid_resolution must be >= m");
  }

  std::string name() const {
    switch (kind) {
      case ExperimentKind::iid_density: return "iid_density";
      case ExperimentKind::multinomial: return "multinomial";
      case ExperimentKind::midpoint: return "midpoint";
      case ExperimentKind::reconstructed: return "reconstructed";
      case ExperimentKind::gaussian_coords: return "gaussian_coords";
      case ExperimentKind::gaussian_increments: return "gaussian_increments";
      case ExperimentKind::white_noise: return "white_noise";
    }
    return "?";
  }
};

struct ThetaVector {
  std::vector<double> theta;

  std::size_t size() const { return theta.size(); }
  double operator[](std::size_t i) const { return theta[i]; }
};

// Discretely observed path: values[k] = y(times[k]) on a uniform grid with
// times[0] = 0 and y(0) = 0.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t resolution() const { return times.empty() ? 0 : times.size() - 1; }
};

inline double cell_lo(std::size_t i, std::size_t m) { return static_cast<double>(i) / static_cast<double>(m); }
inline double cell_hi(std::size_t i, std::size_t m) { return static_cast<double>(i + 1) / static_cast<double>(m); }

// Midpoint x_i* of the (0-based) i-th cell.
inline double midpoint(std::size_t i, std::size_t m) {
  return (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(m));
}

namespace detail {

inline quad::Options cell_quadrature() { return {.abs_tol = 1e-14, .rel_tol = 1e-13, .throw_on_failure = true}; }

template <class F>
double cell_integral(F&& g, const DensityModel& f, double lo, double hi) {
  const auto bps = quad::merge_breakpoints(f.kinks, {}, lo, hi);
  return quad::simpson(g, bps, cell_quadrature()).value;
}

}  // namespace detail

// theta_i = \int_{J_i} f.
inline ThetaVector theta_of(const DensityModel& f, std::size_t m) {
  if (m < 2) throw usage_error("theta_of: m must be >= 2");
  ThetaVector out;
  out.theta.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    out.theta[i] = detail::cell_integral(f.eval, f, cell_lo(i, m), cell_hi(i, m));
  return out;
}

// \int_{J_i} sqrt f, the means of the white-noise increments.
inline std::vector<double> sqrt_cell_integrals(const DensityModel& f, std::size_t m) {
  if (m < 1) throw usage_error("sqrt_cell_integrals: m must be >= 1");
  std::vector<double> out(m);
  auto root = [&](double x) { return std::sqrt(f(x)); };
  for (std::size_t i = 0; i < m; ++i) out[i] = detail::cell_integral(root, f, cell_lo(i, m), cell_hi(i, m));
  return out;
}

// n i.i.d. draws by rejection from the envelope M * Uniform[0,1].
inline std::vector<double> sample_iid(const DensityModel& f, std::size_t n, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(n);
  auto eng = rng::engine(seed);
  const double M = f.cls.M;
  // Acceptance probability is 1/M; a run this long means the bound is wrong.
  const std::size_t stall_limit = 1000 + static_cast<std::size_t>(1000.0 * M);
  std::size_t misses = 0;
  while (out.size() < n) {
    const double x = rng::uniform01(eng);
    const double fx = f(x);
    if (fx > M * (1.0 + 1e-12) || fx < 0.0)
      throw domain_error("sample_iid: density value " + std::to_string(fx) + " outside [0, M]");
    if (rng::uniform01(eng) * M < fx) {
      out.push_back(x);
      misses = 0;
    } else if (++misses > stall_limit) {
      throw domain_error("sample_iid: rejection sampler stalled");
    }
  }
  return out;
}

// Multinomial(n, theta) by sequential conditional binomials.
inline std::vector<std::size_t> sample_multinomial(std::size_t n, std::span<const double> theta,
                                                   std::uint64_t seed) {
  auto eng = rng::engine(seed);
  std::vector<std::size_t> counts(theta.size(), 0);
  std::size_t remaining = n;
  double mass_left = 1.0;
  for (std::size_t i = 0; i + 1 < theta.size() && remaining > 0; ++i) {
    const double p = mass_left > 0.0 ? std::clamp(theta[i] / mass_left, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::size_t> bin(remaining, p);
    counts[i] = bin(eng);
    remaining -= counts[i];
    mass_left -= theta[i];
  }
  if (!theta.empty()) counts.back() += remaining;
  return counts;
}

// m independent N(means_i, variance).
inline std::vector<double> sample_gaussian_vector(std::span<const double> means, double variance,
                                                  std::uint64_t seed) {
  auto eng = rng::engine(seed);
  const double sd = std::sqrt(variance);
  std::vector<double> out(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) out[i] = means[i] + sd * rng::standard_normal(eng);
  return out;
}

// A draw from the gaussian_increments experiment: N(\int_{J_i} sqrt f, 1/(4nm)).
inline std::vector<double> sample_gaussian_increments(const DensityModel& f, std::size_t n, std::size_t m,
                                                      std::uint64_t seed) {
  const auto means = sqrt_cell_integrals(f, m);
  return sample_gaussian_vector(means, 1.0 / (4.0 * static_cast<double>(n) * static_cast<double>(m)), seed);
}

// A draw from the gaussian_coords experiment: N(sqrt(theta_i / m), 1/(4nm)).
inline std::vector<double> sample_gaussian_coords(const ThetaVector& theta, std::size_t n, std::uint64_t seed) {
  const double m = static_cast<double>(theta.size());
  std::vector<double> means(theta.size());
  for (std::size_t i = 0; i < means.size(); ++i) means[i] = std::sqrt(theta[i] / m);
  return sample_gaussian_vector(means, 1.0 / (4.0 * static_cast<double>(n) * m), seed);
}

inline Trajectory uniform_grid(std::size_t resolution) {
  Trajectory t;
  t.times.resize(resolution + 1);
  for (std::size_t k = 0; k <= resolution; ++k)
    t.times[k] = static_cast<double>(k) / static_cast<double>(resolution);
  t.values.assign(resolution + 1, 0.0);
  return t;
}

// Exact-in-law synthesis of dy = sqrt f dt + dW / (2 sqrt n) on a uniform
// grid: each cell increment is its drift integral plus N(0, dt / (4n)).
inline Trajectory sample_white_noise(const DensityModel& f, std::size_t n, std::size_t grid_resolution,
                                     std::uint64_t seed) {
  if (grid_resolution < 1) throw usage_error("sample_white_noise: grid_resolution must be >= 1");
  if (n < 1) throw usage_error("sample_white_noise: n must be >= 1");
  const auto drift = sqrt_cell_integrals(f, grid_resolution);
  const double dt = 1.0 / static_cast<double>(grid_resolution);
  const double noise_sd = std::sqrt(dt) / (2.0 * std::sqrt(static_cast<double>(n)));
  auto eng = rng::engine(seed);
  Trajectory t = uniform_grid(grid_resolution);
  for (std::size_t k = 0; k < grid_resolution; ++k)
    t.values[k + 1] = t.values[k] + drift[k] + noise_sd * rng::standard_normal(eng);
  return t;
}

// Increments y(i/m) - y((i-1)/m) over the m cells.
inline std::vector<double> increments(const Trajectory& traj, std::size_t m) {
  const std::size_t res = traj.resolution();
  if (m < 1 || res == 0 || res % m != 0)
    throw usage_error("increments: m must divide the trajectory grid resolution");
  const std::size_t step = res / m;
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = traj.values[(i + 1) * step] - traj.values[i * step];
  return out;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "time,value\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    os << format_number(traj.times[k]) << ',' << format_number(traj.values[k]) << '\n';
}

inline void write_sample(std::ostream& os, std::span<const double> sample) {
  for (double x : sample) os << format_number(x) << '\n';
}

// One value per line; blank lines are skipped.
inline std::vector<double> read_sample(std::istream& is) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    try {
      const auto v = densities::parse_numbers(std::string_view(line).substr(first, last - first + 1));
      if (v.size() != 1) throw usage_error("");
      out.push_back(v[0]);
    } catch (const usage_error&) {
      throw usage_error("malformed sample file at line " + std::to_string(lineno));
    }
  }
  return out;
}

}  // namespace lecam

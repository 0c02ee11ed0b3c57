#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lecam/error.hpp"
#include "lecam/experiments.hpp"
#include "lecam/measures.hpp"
#include "lecam/rng.hpp"
#include "lecam/tent.hpp"

// Markov kernels as executable randomizations.
//
// A kernel maps an observation of one experiment to a (random) observation
// of another without looking at the unknown density: none of the factories
// below accepts a DensityModel. Sampling is a pure function of the input
// and a 64-bit seed. Where the image of a law has a closed form the kernel
// also carries a pushforward map.

namespace lecam {

// Sample-space descriptor used for compatibility checks.
struct Space {
  std::string name;
  std::size_t dim = 1;

  friend bool operator==(const Space&, const Space&) = default;

  std::string str() const { return name + "^" + std::to_string(dim); }
};

namespace spaces {
inline Space unit_interval(std::size_t n = 1) { return {"[0,1]", n}; }
inline Space midpoints(std::size_t m, std::size_t n = 1) { return {"midpoints(" + std::to_string(m) + ")", n}; }
inline Space counts(std::size_t m) { return {"counts", m}; }
inline Space real(std::size_t n = 1) { return {"R", n}; }
inline Space path(std::size_t resolution) { return {"path", resolution + 1}; }
// Product of n copies of s.
inline Space power(const Space& s, std::size_t n) { return {s.name, s.dim * n}; }
}  // namespace spaces

using Counts = std::vector<std::size_t>;

// Placeholder law type for kernels without a closed-form pushforward.
struct NoLaw {};

template <class In, class Out, class InLaw = NoLaw, class OutLaw = NoLaw>
class MarkovKernel {
 public:
  using input_type = In;
  using output_type = Out;
  using input_law = InLaw;
  using output_law = OutLaw;
  using Sampler = std::function<Out(const In&, std::uint64_t)>;
  using Pushforward = std::function<OutLaw(const InLaw&)>;

  MarkovKernel(Space source, Space target, Sampler sampler, Pushforward pushforward = {})
      : source_(std::move(source)),
        target_(std::move(target)),
        sampler_(std::move(sampler)),
        pushforward_(std::move(pushforward)) {}

  const Space& source() const { return source_; }
  const Space& target() const { return target_; }

  Out sample(const In& x, std::uint64_t seed) const { return sampler_(x, seed); }
  Out operator()(const In& x, std::uint64_t seed) const { return sampler_(x, seed); }

  bool has_pushforward() const { return static_cast<bool>(pushforward_); }

  OutLaw pushforward(const InLaw& law) const {
    if (!pushforward_) throw usage_error("kernel " + source_.str() + " -> " + target_.str() +
                                         " has no closed-form pushforward");
    return pushforward_(law);
  }

 private:
  Space source_;
  Space target_;
  Sampler sampler_;
  Pushforward pushforward_;
};

template <class T, class Law = NoLaw>
MarkovKernel<T, T, Law, Law> identity_kernel(const Space& space) {
  return {space, space, [](const T& x, std::uint64_t) { return x; }, [](const Law& l) { return l; }};
}

// The kernel M(x, B) = 1_B(S(x)) of a statistic S.
template <class In, class Out, class Fn>
MarkovKernel<In, Out> deterministic_kernel(Space source, Space target, Fn statistic) {
  return {std::move(source), std::move(target),
          [statistic](const In& x, std::uint64_t) -> Out { return statistic(x); }};
}

// Composite k2 . k1: sample k1 with stream 0, feed the result to k2 with
// stream 1. The pushforward composes when both sides have one and the
// intermediate law types agree.
template <class A, class B, class C, class LA, class LB1, class LB2, class LC>
MarkovKernel<A, C, LA, LC> compose(const MarkovKernel<A, B, LA, LB1>& k1, const MarkovKernel<B, C, LB2, LC>& k2) {
  if (!(k1.target() == k2.source()))
    throw usage_error("compose: target " + k1.target().str() + " does not match source " + k2.source().str());
  typename MarkovKernel<A, C, LA, LC>::Sampler sampler = [k1, k2](const A& x, std::uint64_t seed) {
    return k2.sample(k1.sample(x, rng::derive(seed, "compose", 0)), rng::derive(seed, "compose", 1));
  };
  typename MarkovKernel<A, C, LA, LC>::Pushforward push;
  if constexpr (std::is_same_v<LB1, LB2> && !std::is_same_v<LA, NoLaw> && !std::is_same_v<LC, NoLaw>) {
    if (k1.has_pushforward() && k2.has_pushforward())
      push = [k1, k2](const LA& law) { return k2.pushforward(k1.pushforward(law)); };
  }
  return {k1.source(), k2.target(), std::move(sampler), std::move(push)};
}

// Coordinatewise product: component i acts on coordinate i with stream i.
// The pushforward of a product law is the product of the pushforwards.
template <class In, class Out, class LI, class LO>
MarkovKernel<std::vector<In>, std::vector<Out>, std::vector<LI>, std::vector<LO>> product_kernel(
    std::vector<MarkovKernel<In, Out, LI, LO>> components) {
  if (components.empty()) throw usage_error("product_kernel: need at least one component");
  Space source = components.front().source();
  Space target = components.front().target();
  source.dim = 0;
  target.dim = 0;
  bool all_push = true;
  for (const auto& k : components) {
    if (k.source().name != source.name || k.target().name != target.name)
      throw usage_error("product_kernel: incompatible component spaces");
    source.dim += k.source().dim;
    target.dim += k.target().dim;
    all_push = all_push && k.has_pushforward();
  }
  auto shared = std::make_shared<const std::vector<MarkovKernel<In, Out, LI, LO>>>(std::move(components));
  using Product = MarkovKernel<std::vector<In>, std::vector<Out>, std::vector<LI>, std::vector<LO>>;
  typename Product::Sampler sampler = [shared](const std::vector<In>& xs, std::uint64_t seed) {
    if (xs.size() != shared->size()) throw usage_error("product_kernel: arity mismatch");
    std::vector<Out> out;
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      out.push_back((*shared)[i].sample(xs[i], rng::derive(seed, "product", i)));
    return out;
  };
  typename Product::Pushforward push;
  if (all_push) {
    push = [shared](const std::vector<LI>& laws) {
      if (laws.size() != shared->size()) throw usage_error("product_kernel: arity mismatch");
      std::vector<LO> out;
      out.reserve(laws.size());
      for (std::size_t i = 0; i < laws.size(); ++i) out.push_back((*shared)[i].pushforward(laws[i]));
      return out;
    };
  }
  return Product(std::move(source), std::move(target), std::move(sampler), std::move(push));
}

// n independent copies of k.
template <class In, class Out, class LI, class LO>
auto power_kernel(const MarkovKernel<In, Out, LI, LO>& k, std::size_t n) {
  return product_kernel(std::vector<MarkovKernel<In, Out, LI, LO>>(n, k));
}

// ---------------------------------------------------------------------------
// Binning and its sufficiency inverse.

// count_i = #{j : x_j in J_i}. Cells are half-open except the last, which
// also takes the point 1.
inline Counts bin_counts(std::span<const double> sample, std::size_t m) {
  if (m < 1) throw usage_error("bin_counts: m must be >= 1");
  Counts counts(m, 0);
  const double md = static_cast<double>(m);
  for (double x : sample) {
    if (!(x >= 0.0 && x <= 1.0)) throw domain_error("bin_counts: point outside [0,1]");
    const auto i = std::min(static_cast<std::size_t>(x * md), m - 1);
    ++counts[i];
  }
  return counts;
}

inline MarkovKernel<std::vector<double>, Counts> binning_kernel(std::size_t m, std::size_t n) {
  return deterministic_kernel<std::vector<double>, Counts>(
      spaces::unit_interval(n), spaces::counts(m), [m](const std::vector<double>& xs) { return bin_counts(xs, m); });
}

// Uniformly random ordering of the multiset holding count_i copies of x_i*.
// This is the conditional law of n i.i.d. X* draws given their counts.
inline std::vector<double> counts_to_midpoint_sample(std::span<const std::size_t> counts, std::uint64_t seed) {
  const std::size_t m = counts.size();
  std::vector<double> out;
  out.reserve(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  for (std::size_t i = 0; i < m; ++i) out.insert(out.end(), counts[i], midpoint(i, m));
  auto eng = rng::engine(seed);
  // Fisher-Yates from the top; written out so the permutation does not
  // depend on the standard library's shuffle.
  for (std::size_t k = out.size(); k > 1; --k) {
    const std::size_t j = static_cast<std::size_t>(rng::uniform01(eng) * static_cast<double>(k));
    std::swap(out[k - 1], out[std::min(j, k - 1)]);
  }
  return out;
}

inline MarkovKernel<Counts, std::vector<double>> midpoint_kernel(std::size_t m, std::size_t n) {
  return {spaces::counts(m), spaces::midpoints(m, n), [m, n](const Counts& c, std::uint64_t seed) {
            if (c.size() != m) throw usage_error("midpoint_kernel: expected " + std::to_string(m) + " counts");
            if (std::accumulate(c.begin(), c.end(), std::size_t{0}) != n)
              throw usage_error("midpoint_kernel: counts must sum to " + std::to_string(n));
            return counts_to_midpoint_sample(c, seed);
          }};
}

// ---------------------------------------------------------------------------
// Reconstruction kernel M(x_j*, A) = \int_A V_j.

// Index j with x == x_j*, or domain_error.
inline std::size_t midpoint_index(double x, std::size_t m) {
  const double md = static_cast<double>(m);
  const double pos = x * md - 0.5;
  const double j = std::round(pos);
  if (j < 0.0 || j >= md || std::abs(pos - j) > 1e-9)
    throw domain_error("reconstruction kernel: input " + std::to_string(x) + " is not a cell midpoint");
  return static_cast<std::size_t>(j);
}

using ReconstructionKernel = MarkovKernel<double, double, DiscreteLaw, PiecewiseLinear>;

inline ReconstructionKernel reconstruction_kernel(std::size_t m) {
  const TentBasis basis(m);
  ReconstructionKernel::Sampler sampler = [basis, m](const double& x, std::uint64_t seed) {
    const std::size_t j = midpoint_index(x, m);
    return basis.quantile(j, rng::uniform01_of(seed));
  };
  ReconstructionKernel::Pushforward push = [m](const DiscreteLaw& law) {
    std::vector<double> w(m, 0.0);
    for (const Atom& a : law.atoms()) w[midpoint_index(a.point, m)] += a.mass;
    return PiecewiseLinear::from_tent_weights(w);
  };
  return {spaces::midpoints(m), spaces::unit_interval(), std::move(sampler), std::move(push)};
}

// Law of X*: mass theta_i at x_i*.
inline DiscreteLaw midpoint_law(std::span<const double> theta) {
  std::vector<Atom> atoms(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) atoms[i] = {midpoint(i, theta.size()), theta[i]};
  double total = 0.0;
  for (const auto& a : atoms) total += a.mass;
  for (auto& a : atoms) a.mass /= total;  // absorb quadrature rounding
  return DiscreteLaw(std::move(atoms));
}

// The full sample-level chain for n observations:
//   [0,1]^n --bin--> counts --shuffle--> midpoints^n --tents--> [0,1]^n.
// It never sees f; applied to an i.i.d. f sample it yields an i.i.d. sample
// from the tent reconstruction of f.
inline MarkovKernel<std::vector<double>, std::vector<double>> transport_chain(std::size_t m, std::size_t n) {
  const auto to_midpoints = compose(binning_kernel(m, n), midpoint_kernel(m, n));
  const auto tents = power_kernel(reconstruction_kernel(m), n);
  // The product kernel carries law types; drop them to compose with the
  // law-less front half.
  MarkovKernel<std::vector<double>, std::vector<double>> back(
      tents.source(), tents.target(),
      [tents](const std::vector<double>& xs, std::uint64_t seed) { return tents.sample(xs, seed); });
  return compose(to_midpoints, back);
}

// Counts -> reconstructed sample (the chain without the binning step).
inline MarkovKernel<Counts, std::vector<double>> counts_transport(std::size_t m, std::size_t n) {
  const auto tents = power_kernel(reconstruction_kernel(m), n);
  MarkovKernel<std::vector<double>, std::vector<double>> back(
      tents.source(), tents.target(),
      [tents](const std::vector<double>& xs, std::uint64_t seed) { return tents.sample(xs, seed); });
  return compose(midpoint_kernel(m, n), back);
}

// ---------------------------------------------------------------------------
// Gaussian increments -> white-noise path.

enum class BridgeMode {
  // One standard Brownian bridge per coordinate.
  independent,
  // All coordinates read the same bridge at their own time change.
  shared,
};

namespace detail {

// Exact draws of a standard Brownian bridge at nondecreasing times in
// [0,1], by sequential Gaussian conditioning:
//   B(v) | B(u) = b  ~  N(b (1-v)/(1-u), (v-u)(1-v)/(1-u)).
inline void bridge_at(std::span<const double> times, std::span<double> out, rng::Engine& eng) {
  double u = 0.0;
  double b = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double v = times[k];
    if (v <= 0.0 || v >= 1.0) {
      out[k] = 0.0;
      if (v >= 1.0) u = 1.0, b = 0.0;
      continue;
    }
    if (v > u) {
      const double rest = 1.0 - u;
      const double mean = b * (1.0 - v) / rest;
      const double var = (v - u) * (1.0 - v) / rest;
      b = mean + std::sqrt(var) * rng::standard_normal(eng);
      u = v;
    }
    out[k] = b;
  }
}

}  // namespace detail

// y*_t = sum_i Ybar_i \int_0^t V_i + (1 / (2 sqrt(nm))) sum_i B_i(\int_0^t V_i)
// on the uniform grid of the given resolution.
inline Trajectory synthesize_ystar(std::span<const double> incs, std::size_t n, std::uint64_t seed,
                                   std::size_t grid_resolution, BridgeMode mode = BridgeMode::independent) {
  const std::size_t m = incs.size();
  if (m < 2) throw usage_error("synthesize_ystar: need m >= 2 increments");
  if (grid_resolution < m) throw usage_error("synthesize_ystar: grid_resolution must be >= m");
  if (n < 1) throw usage_error("synthesize_ystar: n must be >= 1");
  const TentBasis basis(m);
  Trajectory traj = uniform_grid(grid_resolution);
  const std::size_t points = grid_resolution + 1;
  const double noise = 1.0 / (2.0 * std::sqrt(static_cast<double>(n) * static_cast<double>(m)));

  std::vector<double> tc(points), bridge(points);
  if (mode == BridgeMode::independent) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t k = 0; k < points; ++k) tc[k] = basis.cdf(i, traj.times[k]);
      auto eng = rng::engine(rng::derive(seed, "bridge", i));
      detail::bridge_at(tc, bridge, eng);
      for (std::size_t k = 0; k < points; ++k) traj.values[k] += incs[i] * tc[k] + noise * bridge[k];
    }
  } else {
    // Evaluate one bridge at the sorted union of all time changes.
    std::vector<std::pair<double, std::size_t>> req;
    req.reserve(m * points);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < points; ++k) req.emplace_back(basis.cdf(i, traj.times[k]), i * points + k);
    std::sort(req.begin(), req.end());
    std::vector<double> ts(req.size()), bs(req.size());
    for (std::size_t r = 0; r < req.size(); ++r) ts[r] = req[r].first;
    auto eng = rng::engine(rng::derive(seed, "bridge", 0));
    detail::bridge_at(ts, bs, eng);
    std::vector<double> at(req.size());
    for (std::size_t r = 0; r < req.size(); ++r) at[req[r].second] = bs[r];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < points; ++k)
        traj.values[k] += incs[i] * basis.cdf(i, traj.times[k]) + noise * at[i * points + k];
  }
  traj.values[0] = 0.0;
  return traj;
}

}  // namespace lecam

#pragma once

#include <cstdint>
#include <vector>

#include "lecam/measures.hpp"
#include "lecam/rng.hpp"

// Small hand-rolled generators for property tests. Each case draws from its
// own derived stream so a failing case can be replayed by index.
namespace gen {

struct Source {
  explicit Source(std::uint64_t seed, std::uint64_t index) : eng(lecam::rng::engine(lecam::rng::derive(seed, "gen", index))) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * lecam::rng::uniform01(eng); }
  std::size_t integer(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(lecam::rng::uniform01(eng) * static_cast<double>(hi - lo + 1));
  }

  lecam::NormalSpec normal() { return {uniform(-3.0, 3.0), uniform(0.2, 4.0)}; }

  // Random probability vector; some cells may be zero.
  std::vector<double> simplex(std::size_t k, double zero_prob = 0.2) {
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& x : w) {
      x = uniform01() < zero_prob ? 0.0 : uniform(0.0, 1.0);
      total += x;
    }
    if (total == 0.0) {
      w[0] = 1.0;
      total = 1.0;
    }
    for (auto& x : w) x /= total;
    return w;
  }

  // Law on a random subset of the integer points {0, ..., support - 1}.
  lecam::DiscreteLaw discrete(std::size_t support) {
    const auto p = simplex(support);
    std::vector<lecam::Atom> atoms;
    for (std::size_t i = 0; i < support; ++i) atoms.push_back({static_cast<double>(i), p[i]});
    return lecam::DiscreteLaw(std::move(atoms));
  }

  double uniform01() { return lecam::rng::uniform01(eng); }

  lecam::rng::Engine eng;
};

}  // namespace gen

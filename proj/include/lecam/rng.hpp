#pragma once

#include <cstdint>
#include <random>
#include <string_view>

// Seed derivation for reproducible, order-independent random streams.
//
// Every random draw in the library comes from an engine seeded by
// derive(master, name, index). Two streams with different (name, index)
// pairs are statistically independent for all practical purposes, so
// replication r of a sweep produces the same numbers whether it runs
// first, last or on another thread.

namespace lecam::rng {

using Engine = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
constexpr std::uint64_t tag(std::string_view name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t index = 0) noexcept {
  return mix(mix(seed ^ mix(stream)) + index);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::string_view name,
                               std::uint64_t index = 0) noexcept {
  return derive(seed, tag(name), index);
}

inline Engine engine(std::uint64_t seed) { return Engine(mix(seed)); }

// Uniform on [0,1) with 53 random bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// A single uniform on [0,1) straight from a derived seed, for kernels that
// need one draw per call and would otherwise pay for seeding an Engine.
constexpr double uniform01_of(std::uint64_t seed) noexcept {
  return static_cast<double>(mix(seed) >> 11) * 0x1.0p-53;
}

inline double standard_normal(Engine& eng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(eng);
}

}  // namespace lecam::rng

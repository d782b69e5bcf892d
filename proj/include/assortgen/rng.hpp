#pragma once

#include <cstdint>
#include <random>

namespace assortgen {

/// 64-bit seed for a deterministic pseudo-random stream.
struct Seed {
  std::uint64_t value{0};
};

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent child seed for job `index` of a run seeded with `master`.
inline Seed derive_seed(Seed master, std::uint64_t index) {
  return Seed{splitmix64(splitmix64(master.value) ^ splitmix64(index + 0x632be59bd9b4e019ULL))};
}

inline Rng make_rng(Seed seed) { return Rng(splitmix64(seed.value)); }

// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace assortgen

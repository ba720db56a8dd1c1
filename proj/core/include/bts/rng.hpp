#pragma once

#include <cstdint>
#include <random>

namespace bts {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20160525;

// splitmix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the independent stream for trial `index` of an experiment seeded
/// with `seed`. Trial results are a pure function of (seed, index), so the
/// aggregate never depends on how trials are spread over workers.
constexpr std::uint64_t stream_seed(std::uint64_t seed,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(seed) ^ mix64(index ^ 0x5851f42d4c957f2dULL));
}

inline Rng trial_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(stream_seed(seed, index));
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace bts

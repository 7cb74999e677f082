#pragma once

// Seeded streams keyed by (seed, tag, index...) so that every ensemble
// member and mode draws from its own generator, independent of the order
// in which tasks run.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace kdvlab {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k));
  return h;
}

using Stream = std::mt19937_64;

inline Stream make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Stream(derive_seed(seed, keys));
}

/// Uniform draw in [0, 1) with 53 random bits.
inline double uniform01(Stream& s) { return static_cast<double>(s() >> 11) * 0x1.0p-53; }

}  // namespace kdvlab

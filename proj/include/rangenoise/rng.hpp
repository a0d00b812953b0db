#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rangenoise::rng {

/// SplitMix64 finalizer: one avalanche round over a 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// Stateless stream derivation: hashes (seed, a, b, c) into one word.
/// Distinct inputs give independent-looking streams, so draws can be
/// generated in any order (and from any thread) with identical results.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t a,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = mix64(seed + golden);
  h = mix64(h ^ (a + golden));
  h = mix64(h ^ (b + golden));
  h = mix64(h ^ (c + golden));
  return h;
}

/// Maps 64 random bits to (0, 1]; never returns 0, so log() stays finite.
inline double uniform01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal draw from a counter-based stream via Box-Muller. The
/// value depends only on (seed, stream, counter).
inline double standard_normal(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter) {
  const double u1 = uniform01(derive(seed, stream, counter, 0));
  const double u2 = uniform01(derive(seed, stream, counter, 1));
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rangenoise::rng

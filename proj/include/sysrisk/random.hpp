#pragma once

#include <cstdint>
#include <random>

namespace sysrisk {

using Rng = std::mt19937_64;

// Decorrelates (seed, stream) pairs so that per-sample and per-chain
// generators can be derived from one user seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

// Uniform on [0, 1) from the top 53 bits. Used instead of
// std::uniform_real_distribution wherever bit-reproducible output matters.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace sysrisk

namespace sysrisk {

// Uniform integer in [0, bound) without modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  // Largest multiple of `bound` representable; draws at or above it are redrawn.
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x > limit);
  return x % bound;
}

}  // namespace sysrisk

#include <cmath>

namespace sysrisk {

// Standard normal by Box–Muller on two fresh uniforms.
inline double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace sysrisk

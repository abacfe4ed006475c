#pragma once

// Counter-based pseudo-random streams. Every draw is a pure function of
// (seed, stream, counter), so results do not depend on call order, thread
// count or the standard library's distribution implementations.

#include <cmath>
#include <cstdint>

#include "planck/manifold.hpp"

namespace planck {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix64(key_ + 0x9e3779b97f4a7c15ULL * (counter + 1));
  }

  /// Uniform in [0, 1), 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller from counters 2i and 2i+1.
  double normal(std::uint64_t i) const {
    const double u1 = 1.0 - uniform(2 * i);  // (0, 1]
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  std::uint64_t key_;
};

/// Uniformly distributed random point on the manifold (volume measure).
inline Point random_point(Manifold m, const CounterRng& rng, std::uint64_t i) {
  const double a = rng.uniform(2 * i), b = rng.uniform(2 * i + 1);
  switch (m.kind) {
    case ManifoldKind::Circle: return circle_point(kTwoPi * a);
    case ManifoldKind::Torus2: return torus_point(kTwoPi * a, kTwoPi * b);
    case ManifoldKind::Sphere2: return sphere_point(std::acos(1.0 - 2.0 * a), kTwoPi * b);
  }
  return {};
}

}  // namespace planck

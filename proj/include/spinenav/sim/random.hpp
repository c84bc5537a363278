#pragma once

#include <cstdint>
#include <random>

#include "spinenav/core/types.hpp"

namespace spinenav::sim {

using Rng = std::mt19937_64;

/// Decorrelated child seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng, double sigma) {
  if (sigma == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

/// Uniformly distributed direction.
inline UnitVector3 random_direction(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  while (true) {
    const Eigen::Vector3d v(n(rng), n(rng), n(rng));
    if (v.norm() > 1e-6) return UnitVector3(v);
  }
}

/// Uniform random rotation (Haar measure) with a translation uniform in a
/// cube of half-width `translation_range`.
inline RigidTransform random_pose(Rng& rng, double translation_range) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  const Point3 t(uniform(rng, -translation_range, translation_range),
                 uniform(rng, -translation_range, translation_range),
                 uniform(rng, -translation_range, translation_range));
  return {q.toRotationMatrix(), t};
}

/// Some unit vector perpendicular to `v`, chosen uniformly at random.
inline UnitVector3 random_perpendicular(Rng& rng, const UnitVector3& v) {
  while (true) {
    const Eigen::Vector3d r = random_direction(rng).vec();
    const Eigen::Vector3d p = r - r.dot(v.vec()) * v.vec();
    if (p.norm() > 1e-3) return UnitVector3(p);
  }
}

}  // namespace spinenav::sim

#pragma once

#include <optional>

#include "spinenav/core/types.hpp"

namespace spinenav::kernels {

struct RayHit {
  double distance;  // ray parameter, >= 0
  std::size_t face;
  Point3 point;
};

/// Barycentric slack used by the triangle test.
inline constexpr double kBarycentricTolerance = 1e-9;

/// Moller-Trumbore test; returns the ray parameter of the hit, if any.
std::optional<double> intersect_triangle(const Ray& ray, const Point3& a, const Point3& b,
                                         const Point3& c);

std::optional<RayHit> first_hit_serial(const Ray& ray, const TriangleMesh& mesh);
std::optional<RayHit> first_hit_parallel(const Ray& ray, const TriangleMesh& mesh);

}  // namespace spinenav::kernels

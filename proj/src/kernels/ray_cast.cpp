#include "spinenav/kernels/ray_cast.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <omp.h>

namespace spinenav::kernels {

std::optional<double> intersect_triangle(const Ray& ray, const Point3& a, const Point3& b,
                                         const Point3& c) {
  const Eigen::Vector3d e1 = b - a;
  const Eigen::Vector3d e2 = c - a;
  const Eigen::Vector3d& d = ray.direction.vec();
  const Eigen::Vector3d p = d.cross(e2);
  const double det = e1.dot(p);
  // Ray parallel to the triangle plane (relative to the triangle scale).
  if (std::abs(det) <= 1e-14 * e1.norm() * e2.norm()) return std::nullopt;
  const double inv = 1.0 / det;
  const Eigen::Vector3d s = ray.origin - a;
  const double u = s.dot(p) * inv;
  if (u < -kBarycentricTolerance || u > 1.0 + kBarycentricTolerance) return std::nullopt;
  const Eigen::Vector3d q = s.cross(e1);
  const double v = d.dot(q) * inv;
  if (v < -kBarycentricTolerance || u + v > 1.0 + kBarycentricTolerance) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (t < 0.0) return std::nullopt;
  return t;
}

namespace {

struct Best {
  double t = std::numeric_limits<double>::infinity();
  std::size_t face = std::numeric_limits<std::size_t>::max();

  void offer(double t_new, std::size_t f) {
    if (t_new < t || (t_new == t && f < face)) {
      t = t_new;
      face = f;
    }
  }
};

std::optional<RayHit> to_hit(const Ray& ray, const Best& best) {
  if (best.face == std::numeric_limits<std::size_t>::max()) return std::nullopt;
  return RayHit{best.t, best.face, ray.at(best.t)};
}

}  // namespace

std::optional<RayHit> first_hit_serial(const Ray& ray, const TriangleMesh& mesh) {
  Best best;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& [i, j, k] = mesh.faces[f];
    if (auto t = intersect_triangle(ray, mesh.vertices[i], mesh.vertices[j], mesh.vertices[k])) {
      best.offer(*t, f);
    }
  }
  return to_hit(ray, best);
}

std::optional<RayHit> first_hit_parallel(const Ray& ray, const TriangleMesh& mesh) {
  const auto n = static_cast<std::int64_t>(mesh.faces.size());
  std::vector<Best> partial(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
  {
    Best local;
#pragma omp for schedule(static)
    for (std::int64_t f = 0; f < n; ++f) {
      const auto& [i, j, k] = mesh.faces[static_cast<std::size_t>(f)];
      if (auto t =
              intersect_triangle(ray, mesh.vertices[i], mesh.vertices[j], mesh.vertices[k])) {
        local.offer(*t, static_cast<std::size_t>(f));
      }
    }
    partial[static_cast<std::size_t>(omp_get_thread_num())] = local;
  }
  // (t, face) ordering is total, so the merge order does not matter.
  Best best;
  for (const auto& p : partial) {
    if (p.face != std::numeric_limits<std::size_t>::max()) best.offer(p.t, p.face);
  }
  return to_hit(ray, best);
}

}  // namespace spinenav::kernels

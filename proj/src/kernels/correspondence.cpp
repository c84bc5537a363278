#include "spinenav/kernels/correspondence.hpp"

#include <cmath>

namespace spinenav::kernels {

namespace {

Correspondences allocate(std::size_t n) {
  Correspondences c;
  c.target.assign(n, -1);
  c.squared_distance.assign(n, 0.0);
  return c;
}

void match_one(std::size_t i, std::span<const Point3> source, const RigidTransform& pose,
               const KdTree& target, double gate2, Correspondences& out) {
  const auto nb = target.nearest(pose.apply(source[i]));
  out.squared_distance[i] = nb.squared_distance;
  out.target[i] = nb.squared_distance <= gate2 ? static_cast<std::int64_t>(nb.index) : -1;
}

void finalize(Correspondences& c) {
  double sum = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < c.target.size(); ++i) {
    if (c.target[i] < 0) continue;
    sum += c.squared_distance[i];
    ++m;
  }
  c.matched = m;
  c.rmse = m > 0 ? std::sqrt(sum / static_cast<double>(m)) : 0.0;
}

}  // namespace

Correspondences match_serial(std::span<const Point3> source, const RigidTransform& pose,
                             const KdTree& target, double max_distance) {
  auto out = allocate(source.size());
  const double gate2 = max_distance * max_distance;
  for (std::size_t i = 0; i < source.size(); ++i) match_one(i, source, pose, target, gate2, out);
  finalize(out);
  return out;
}

Correspondences match_parallel(std::span<const Point3> source, const RigidTransform& pose,
                               const KdTree& target, double max_distance) {
  auto out = allocate(source.size());
  const double gate2 = max_distance * max_distance;
  const auto n = static_cast<std::int64_t>(source.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    match_one(static_cast<std::size_t>(i), source, pose, target, gate2, out);
  }
  finalize(out);
  return out;
}

}  // namespace spinenav::kernels

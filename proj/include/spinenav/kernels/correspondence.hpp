#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinenav/core/types.hpp"
#include "spinenav/kernels/kdtree.hpp"

namespace spinenav::kernels {

/// Nearest-neighbour pairing of transformed source points against a target
/// index. `target[i] == -1` marks a source point rejected by the distance gate.
struct Correspondences {
  std::vector<std::int64_t> target;
  std::vector<double> squared_distance;
  std::size_t matched = 0;
  double rmse = 0.0;  // over matched pairs only
};

// Both variants produce bit-identical output: per-point work is independent
// and the RMSE is summed serially in index order.
Correspondences match_serial(std::span<const Point3> source, const RigidTransform& pose,
                             const KdTree& target, double max_distance);
Correspondences match_parallel(std::span<const Point3> source, const RigidTransform& pose,
                               const KdTree& target, double max_distance);

}  // namespace spinenav::kernels

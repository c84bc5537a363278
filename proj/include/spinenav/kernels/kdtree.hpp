#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinenav/core/types.hpp"

namespace spinenav::kernels {

/// Static 3D kd-tree for exact nearest-neighbour queries. Immutable after
/// construction; concurrent queries are safe.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index;
    double squared_distance;
  };

  explicit KdTree(std::span<const Point3> points);

  /// Exact nearest neighbour; equal distances resolve to the lowest index.
  Neighbor nearest(const Point3& query) const;

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Point3>& points() const noexcept { return points_; }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;  // -1 marks a leaf
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& q, Neighbor& best) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace spinenav::kernels

#include "spinenav/kernels/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace spinenav::kernels {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

KdTree::KdTree(std::span<const Point3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) throw Error(ErrorCode::EmptyInput, "kd-tree over empty point set");
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (auto i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];

  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(std::int32_t id, const Point3& q, Neighbor& best) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const auto idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
        best = {idx, d2};
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const auto near = diff < 0.0 ? node.left : node.right;
  const auto far = diff < 0.0 ? node.right : node.left;
  search(near, q, best);
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

KdTree::Neighbor KdTree::nearest(const Point3& query) const {
  Neighbor best{std::numeric_limits<std::size_t>::max(),
                std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

}  // namespace spinenav::kernels

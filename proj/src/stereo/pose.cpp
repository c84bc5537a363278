#include "spinenav/stereo/pose.hpp"

#include <cmath>
#include <limits>

#include "spinenav/core/geometry.hpp"
#include "spinenav/core/io.hpp"

namespace spinenav::stereo {

Triangulation triangulate_closest_point(const Ray& left, const Ray& right) {
  const Eigen::Vector3d& d1 = left.direction.vec();
  const Eigen::Vector3d& d2 = right.direction.vec();
  const double cross = d1.cross(d2).norm();
  if (cross < 1e-12) throw Error(ErrorCode::ParallelRays, "viewing rays are parallel");

  const Eigen::Vector3d w0 = left.origin - right.origin;
  const double b = d1.dot(d2);
  const double d = d1.dot(w0);
  const double e = d2.dot(w0);
  const double denom = cross * cross;  // 1 - b^2 for unit directions
  const double s = (b * e - d) / denom;
  const double t = (e - b * d) / denom;

  const Point3 p1 = left.at(s);
  const Point3 p2 = right.at(t);
  return {0.5 * (p1 + p2), (p1 - p2).norm()};
}

MarkerGeometry MarkerGeometry::square(double side_length_mm) {
  if (!(side_length_mm > 0.0)) throw Error(ErrorCode::InvalidArgument, "marker side must be > 0");
  const double h = 0.5 * side_length_mm;
  MarkerGeometry g;
  g.side_length = side_length_mm;
  g.corners = {Point3(-h, h, 0.0), Point3(-h, -h, 0.0), Point3(h, -h, 0.0), Point3(h, h, 0.0)};
  return g;
}

void MarkerGeometry::validate() const {
  constexpr double tol = 1e-6;
  Point3 c = Point3::Zero();
  for (const auto& p : corners) {
    if (std::abs(p.z()) > tol) throw Error(ErrorCode::InvalidArgument, "marker corners not in z = 0");
    c += p;
  }
  if ((c / 4.0).norm() > tol) throw Error(ErrorCode::InvalidArgument, "marker not centred");
  for (int i = 0; i < 4; ++i) {
    const double edge = (corners[(i + 1) % 4] - corners[i]).norm();
    if (std::abs(edge - side_length) > tol) {
      throw Error(ErrorCode::InvalidArgument, "marker corners do not form a square of the given side");
    }
  }
  const double diag = std::sqrt(2.0) * side_length;
  if (std::abs((corners[2] - corners[0]).norm() - diag) > tol ||
      std::abs((corners[3] - corners[1]).norm() - diag) > tol) {
    throw Error(ErrorCode::InvalidArgument, "marker corners do not form a square");
  }
}

MarkerPose estimate_marker_pose(const StereoRig& rig, const StereoCorners& corners,
                                const MarkerGeometry& geom, const PoseOptions& options) {
  MarkerPose out;
  std::array<Point3, 4> triangulated;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto tri = triangulate_closest_point(viewing_ray(rig.left, corners.left[i]),
                                               viewing_ray(rig.right, corners.right[i]));
    triangulated[i] = tri.midpoint;
    out.triangulation_gaps[i] = tri.gap;
  }

  out.pose = absolute_orientation(geom.corners, triangulated);

  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point3 p = out.pose.apply(geom.corners[i]);
    const auto pl = rig.left.project(p);
    const auto pr = rig.right.project(p);
    if (!pl || !pr) {
      sum = std::numeric_limits<double>::infinity();
      break;
    }
    sum += (*pl - corners.left[i]).squaredNorm() + (*pr - corners.right[i]).squaredNorm();
  }
  out.reprojection_rmse = std::sqrt(sum / 8.0);

  if (!(out.reprojection_rmse <= options.max_reprojection_rmse_px)) {
    throw Error(ErrorCode::ReprojectionRejected,
                "reprojection RMSE " + std::to_string(out.reprojection_rmse) + " px exceeds " +
                    std::to_string(options.max_reprojection_rmse_px) + " px");
  }
  return out;
}

Point3 tool_tip_position(const MarkerPose& pose, const ToolGeometry& tool) {
  return pose.pose.apply(tool.tip_offset);
}

UnitVector3 tool_axis(const MarkerPose& pose, const ToolGeometry& tool) {
  return pose.pose.rotate(tool.axis);
}

nlohmann::json to_json(const MarkerGeometry& geom) {
  nlohmann::json corners = nlohmann::json::array();
  for (const auto& c : geom.corners) corners.push_back(io::to_json(c));
  return {{"side_length_mm", geom.side_length}, {"corners_mm", corners}};
}

MarkerGeometry marker_from_json(const nlohmann::json& j) {
  if (!j.contains("side_length_mm")) throw Error(ErrorCode::ParseError, "marker needs 'side_length_mm'");
  auto geom = MarkerGeometry::square(j.at("side_length_mm").get<double>());
  if (j.contains("corners_mm")) {
    const auto& c = j.at("corners_mm");
    if (!c.is_array() || c.size() != 4) throw Error(ErrorCode::ParseError, "corners_mm needs 4 points");
    for (std::size_t i = 0; i < 4; ++i) geom.corners[i] = io::point_from_json(c[i]);
  }
  geom.validate();
  return geom;
}

nlohmann::json to_json(const MarkerPose& pose) {
  return {{"pose", io::to_json(pose.pose)},
          {"reprojection_rmse_px", pose.reprojection_rmse},
          {"triangulation_gaps_mm", pose.triangulation_gaps}};
}

}  // namespace spinenav::stereo

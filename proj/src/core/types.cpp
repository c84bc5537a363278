#include "spinenav/core/types.hpp"

#include <algorithm>
#include <cmath>

namespace spinenav {

UnitVector3::UnitVector3(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < 1e-300) {
    throw Error(ErrorCode::DegenerateGeometry, "cannot normalize a zero or non-finite vector");
  }
  v_ = v / n;
}

bool is_proper_rotation(const Eigen::Matrix3d& r, double tol) {
  if (!r.allFinite()) return false;
  const Eigen::Matrix3d gram = r.transpose() * r;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation, const Point3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_proper_rotation(rotation_)) {
    throw Error(ErrorCode::InvalidArgument, "rotation is not a proper orthonormal matrix");
  }
  if (!translation_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "translation is not finite");
  }
}

RigidTransform RigidTransform::rotation_about(const Eigen::Vector3d& axis, double angle_rad,
                                              const Point3& pivot) {
  const Eigen::Matrix3d r = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
  return {r, pivot - r * pivot};
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation_ = rotation_ * other.rotation_;
  out.translation_ = rotation_ * other.translation_ + translation_;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

double RigidTransform::rotation_angle_deg() const {
  // atan2 form stays accurate near 0 and 180 degrees.
  const Eigen::Matrix3d& r = rotation_;
  const Eigen::Vector3d axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = 0.5 * axis.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  return rad_to_deg(std::atan2(s, c));
}

void PointCloud::validate() const {
  if (!normals.empty() && normals.size() != points.size()) {
    throw Error(ErrorCode::InvalidArgument, "normals length differs from points length");
  }
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite point");
  }
}

void TriangleMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (auto i : faces[f]) {
      if (i >= n) throw Error(ErrorCode::InvalidArgument, "face index out of range", f);
    }
    if (face_area(f) <= 0.0) {
      throw Error(ErrorCode::DegenerateGeometry, "zero-area face", f);
    }
  }
}

Eigen::Vector3d TriangleMesh::face_normal(std::size_t f) const {
  const auto& [i, j, k] = faces[f];
  const Eigen::Vector3d n = (vertices[j] - vertices[i]).cross(vertices[k] - vertices[i]);
  return n.normalized();
}

double TriangleMesh::face_area(std::size_t f) const {
  const auto& [i, j, k] = faces[f];
  return 0.5 * (vertices[j] - vertices[i]).cross(vertices[k] - vertices[i]).norm();
}

double TriangleMesh::total_area() const {
  double a = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) a += face_area(f);
  return a;
}

}  // namespace spinenav

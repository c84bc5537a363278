#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "spinenav/core/error.hpp"

namespace spinenav {

/// Position in millimeters, right-handed frame.
using Point3 = Eigen::Vector3d;

/// Direction with Euclidean norm 1 (within 1e-9).
class UnitVector3 {
 public:
  UnitVector3() : v_(1.0, 0.0, 0.0) {}
  UnitVector3(double x, double y, double z) : UnitVector3(Eigen::Vector3d(x, y, z)) {}
  /// Normalizes `v`; throws DegenerateGeometry for (near) zero or non-finite input.
  explicit UnitVector3(const Eigen::Vector3d& v);

  /// Wraps a vector that the caller guarantees is already unit length.
  static UnitVector3 assume_normalized(const Eigen::Vector3d& v) {
    UnitVector3 u;
    u.v_ = v;
    return u;
  }

  const Eigen::Vector3d& vec() const noexcept { return v_; }
  operator const Eigen::Vector3d&() const noexcept { return v_; }
  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }
  double dot(const Eigen::Vector3d& o) const noexcept { return v_.dot(o); }
  UnitVector3 operator-() const noexcept { return assume_normalized(-v_); }

 private:
  Eigen::Vector3d v_;
};

/// Proper rigid motion p -> R p + t. R is orthonormal with det +1.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Eigen::Matrix3d::Identity()), translation_(Point3::Zero()) {}
  /// Validates orthonormality (1e-9) and det = +1; throws InvalidArgument otherwise.
  RigidTransform(const Eigen::Matrix3d& rotation, const Point3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Point3& t) { return {Eigen::Matrix3d::Identity(), t}; }
  static RigidTransform rotation_about(const Eigen::Vector3d& axis, double angle_rad,
                                       const Point3& pivot = Point3::Zero());

  const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  const Point3& translation() const noexcept { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  Eigen::Vector3d rotate(const Eigen::Vector3d& v) const { return rotation_ * v; }
  UnitVector3 rotate(const UnitVector3& v) const {
    return UnitVector3::assume_normalized(rotation_ * v.vec());
  }

  /// (a * b).apply(p) == a.apply(b.apply(p))
  RigidTransform operator*(const RigidTransform& other) const;
  RigidTransform inverse() const;

  /// Geodesic rotation angle in degrees, in [0, 180].
  double rotation_angle_deg() const;

 private:
  Eigen::Matrix3d rotation_;
  Point3 translation_;
};

bool is_proper_rotation(const Eigen::Matrix3d& r, double tol = 1e-9);

struct PointCloud {
  std::vector<Point3> points;
  std::vector<UnitVector3> normals;  // empty, or same length as points

  bool has_normals() const noexcept { return !normals.empty(); }
  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  /// Throws InvalidArgument when normals are present with the wrong length.
  void validate() const;
};

using Face = std::array<std::uint32_t, 3>;

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<Face> faces;

  /// Index range and non-zero area checks.
  void validate() const;
  Eigen::Vector3d face_normal(std::size_t f) const;  // unit, right-hand winding
  double face_area(std::size_t f) const;
  double total_area() const;
};

struct Ray {
  Point3 origin = Point3::Zero();
  UnitVector3 direction;

  Point3 at(double s) const { return origin + s * direction.vec(); }
};

inline double rad_to_deg(double r) { return r * 180.0 / 3.14159265358979323846; }
inline double deg_to_rad(double d) { return d * 3.14159265358979323846 / 180.0; }

}  // namespace spinenav

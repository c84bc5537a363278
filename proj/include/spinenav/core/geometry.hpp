#pragma once

#include <optional>
#include <span>

#include "spinenav/core/types.hpp"

namespace spinenav {

/// Closed-form least-squares rigid fit (Horn's unit-quaternion method):
/// returns T minimizing sum |T(source_i) - target_i|^2. The result is always
/// a proper rotation.
///
/// Throws MismatchedLengths, or DegenerateGeometry when fewer than 3 points
/// are given or the centered source matrix has s2 < 1e-9 * s1 (collinear or
/// coincident points).
RigidTransform absolute_orientation(std::span<const Point3> source,
                                    std::span<const Point3> target);

/// Singular values of the centered point matrix, descending.
Eigen::Vector3d centered_singular_values(std::span<const Point3> points);

/// True when the points are collinear or coincident per the s2 < 1e-9 s1 rule.
bool is_collinear(std::span<const Point3> points);

PointCloud apply_transform(const RigidTransform& t, const PointCloud& pc);
std::vector<Point3> apply_transform(const RigidTransform& t, std::span<const Point3> pts);

/// sqrt(mean |a_i - b_i|^2). Throws MismatchedLengths / EmptyInput.
double rmse(std::span<const Point3> a, std::span<const Point3> b);

Point3 centroid(std::span<const Point3> points);

/// First intersection (smallest non-negative ray parameter) of `ray` with
/// `mesh`, or nullopt on a miss. Equal parameters resolve to the lowest face
/// index.
std::optional<Point3> ray_mesh_first_intersection(const Ray& ray, const TriangleMesh& mesh);

}  // namespace spinenav

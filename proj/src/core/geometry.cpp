#include "spinenav/core/geometry.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "spinenav/kernels/ray_cast.hpp"

namespace spinenav {

namespace {

constexpr double kCollinearRatio = 1e-9;

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorCode::MismatchedLengths,
                "point lists differ in length (" + std::to_string(a) + " vs " +
                    std::to_string(b) + ")");
  }
}

}  // namespace

Point3 centroid(std::span<const Point3> points) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "centroid of empty point set");
  Point3 c = Point3::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

Eigen::Vector3d centered_singular_values(std::span<const Point3> points) {
  const Point3 c = centroid(points);
  // SVD of the centered matrix itself: going through the scatter matrix would
  // square the condition number and hide near-collinearity.
  Eigen::MatrixX3d centered(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    centered.row(static_cast<Eigen::Index>(i)) = (points[i] - c).transpose();
  }
  Eigen::Vector3d s = Eigen::Vector3d::Zero();
  const Eigen::JacobiSVD<Eigen::MatrixX3d> svd(centered);
  s.head(svd.singularValues().size()) = svd.singularValues();
  return s;
}

bool is_collinear(std::span<const Point3> points) {
  if (points.size() < 3) return true;
  const Eigen::Vector3d s = centered_singular_values(points);
  return s(0) <= 0.0 || s(1) < kCollinearRatio * s(0);
}

RigidTransform absolute_orientation(std::span<const Point3> source,
                                    std::span<const Point3> target) {
  require_same_length(source.size(), target.size());
  if (source.size() < 3) {
    throw Error(ErrorCode::DegenerateGeometry, "absolute orientation needs at least 3 pairs");
  }
  if (is_collinear(source)) {
    throw Error(ErrorCode::DegenerateGeometry, "source points are collinear or coincident");
  }

  const Point3 cs = centroid(source);
  const Point3 ct = centroid(target);

  // Cross-covariance S(a, b) = sum (src_a)(tgt_b).
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    s.noalias() += (source[i] - cs) * (target[i] - ct).transpose();
  }

  const double sxx = s(0, 0), sxy = s(0, 1), sxz = s(0, 2);
  const double syx = s(1, 0), syy = s(1, 1), syz = s(1, 2);
  const double szx = s(2, 0), szy = s(2, 1), szz = s(2, 2);

  Eigen::Matrix4d n;
  n << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(n);
  Eigen::Vector4d q = eig.eigenvectors().col(3);
  if (q(0) < 0.0) q = -q;  // canonical sign, the rotation is unchanged
  const Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
  const Eigen::Matrix3d r = quat.normalized().toRotationMatrix();

  return {r, ct - r * cs};
}

std::vector<Point3> apply_transform(const RigidTransform& t, std::span<const Point3> pts) {
  std::vector<Point3> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(t.apply(p));
  return out;
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& pc) {
  PointCloud out;
  out.points = apply_transform(t, std::span<const Point3>(pc.points));
  out.normals.reserve(pc.normals.size());
  for (const auto& n : pc.normals) out.normals.push_back(t.rotate(n));
  return out;
}

double rmse(std::span<const Point3> a, std::span<const Point3> b) {
  require_same_length(a.size(), b.size());
  if (a.empty()) throw Error(ErrorCode::EmptyInput, "rmse of empty lists");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(a.size()));
}

std::optional<Point3> ray_mesh_first_intersection(const Ray& ray, const TriangleMesh& mesh) {
  auto hit = kernels::first_hit_parallel(ray, mesh);
  if (!hit) return std::nullopt;
  return hit->point;
}

}  // namespace spinenav

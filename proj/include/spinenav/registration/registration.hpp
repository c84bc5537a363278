#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "spinenav/core/types.hpp"
#include "spinenav/kernels/kdtree.hpp"

namespace spinenav::registration {

/// Principal axes ordered by decreasing eigenvalue of the (1/n) covariance.
/// Each axis is signed so that the point with the largest absolute
/// projection (about the centroid) projects positively.
struct PrincipalAxes {
  std::array<UnitVector3, 3> axes;
  Point3 centroid = Point3::Zero();
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();

  const UnitVector3& pa1() const { return axes[0]; }
  const UnitVector3& pa2() const { return axes[1]; }
  const UnitVector3& pa3() const { return axes[2]; }
};

/// Coarse-alignment landmarks: e1 = argmax pa1.p, e2 = argmin pa1.p,
/// e3 = argmax |pa2.p| (projections about the centroid, lowest index wins).
struct ExtremeTriple {
  Point3 e1, e2, e3;
  std::array<std::size_t, 3> indices{};

  /// e3 is the same cloud point as e1 or e2.
  bool has_duplicate() const { return indices[2] == indices[0] || indices[2] == indices[1]; }
  std::array<Point3, 3> points() const { return {e1, e2, e3}; }
};

struct RegistrationConfig {
  int icp_max_iterations = 100;
  double icp_convergence_delta = 1e-4;       // mm
  double icp_max_correspondence_dist = 20.0;  // mm
  double trim_normal_threshold = 0.0;        // in [-1, 1]

  void validate() const;
};

nlohmann::json to_json(const RegistrationConfig& cfg);
/// Missing keys keep their defaults.
RegistrationConfig config_from_json(const nlohmann::json& j);

/// Keeps points whose normal . (-approach) > cfg.trim_normal_threshold,
/// preserving order. Throws MissingNormals.
PointCloud trim_reachable(const PointCloud& pre, const UnitVector3& approach,
                          const RegistrationConfig& cfg);

/// Keeps points whose mask entry is true. Throws MismatchedLengths.
PointCloud trim_by_mask(const PointCloud& pre, const std::vector<bool>& keep);

/// Throws DegenerateGeometry for fewer than 3 points or rank < 2.
PrincipalAxes pca_axes(std::span<const Point3> points);

/// Throws EmptyInput.
ExtremeTriple extreme_points(std::span<const Point3> points, const PrincipalAxes& axes);

/// The two landmark pairings: configuration 1 pairs (e1,e1),(e2,e2),(e3,e3);
/// configuration 2 swaps e1/e2 to absorb the left-right ambiguity of pa1.
/// Both map the intra frame onto the pre frame. Throws DegenerateGeometry.
std::pair<RigidTransform, RigidTransform> coarse_registrations(const ExtremeTriple& intra,
                                                               const ExtremeTriple& pre);

/// Same pairings with the cloud centroids added as a fourth pair; used when a
/// triple collapses onto a line.
std::pair<RigidTransform, RigidTransform> coarse_registrations(const ExtremeTriple& intra,
                                                               const ExtremeTriple& pre,
                                                               const Point3& intra_centroid,
                                                               const Point3& pre_centroid);

struct IcpResult {
  RigidTransform transform;
  double final_rmse = 0.0;  // over gated correspondences at `transform`
  int iterations = 0;       // accepted iterations
  std::size_t matched = 0;
  /// RMSE at the initial pose followed by one entry per accepted iteration.
  /// Non-increasing by construction.
  std::vector<double> rmse_history;
};

/// Point-to-point ICP. An iteration whose re-matched RMSE would exceed the
/// current one is rejected and ends the loop. Throws NoCorrespondences.
IcpResult icp(std::span<const Point3> source, const kernels::KdTree& target,
              const RigidTransform& init, const RegistrationConfig& cfg);
IcpResult icp(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
              const RegistrationConfig& cfg);

struct ConfigurationOutcome {
  RigidTransform coarse;
  IcpResult fine;
};

struct RegistrationResult {
  RigidTransform transform;  // intra -> pre frame
  double final_rmse = 0.0;
  int chosen_configuration = 1;  // 1 or 2; ties pick 1
  std::array<ConfigurationOutcome, 2> configurations;
  std::size_t intra_points = 0;
  std::size_t trimmed_model_points = 0;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const RegistrationResult& result);

/// Full pipeline on an already-trimmed model cloud: PCA and extreme points on
/// both clouds, both coarse configurations, ICP from each, keep the smaller
/// final RMSE.
RegistrationResult register_trimmed(const PointCloud& intra, const PointCloud& trimmed_model,
                                    const RegistrationConfig& cfg);

/// trim_reachable followed by register_trimmed.
RegistrationResult register_surface(const PointCloud& intra, const PointCloud& pre_model,
                                    const UnitVector3& approach, const RegistrationConfig& cfg);

}  // namespace spinenav::registration

#include "spinenav/registration/registration.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "spinenav/core/geometry.hpp"
#include "spinenav/core/io.hpp"
#include "spinenav/kernels/correspondence.hpp"

namespace spinenav::registration {

void RegistrationConfig::validate() const {
  if (icp_max_iterations <= 0) throw Error(ErrorCode::InvalidParams, "icp_max_iterations must be > 0");
  if (!(icp_convergence_delta > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "icp_convergence_delta must be > 0");
  }
  if (!(icp_max_correspondence_dist > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "icp_max_correspondence_dist must be > 0");
  }
  if (!(trim_normal_threshold >= -1.0 && trim_normal_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "trim_normal_threshold must lie in [-1, 1]");
  }
}

nlohmann::json to_json(const RegistrationConfig& cfg) {
  return {{"icp_max_iterations", cfg.icp_max_iterations},
          {"icp_convergence_delta", cfg.icp_convergence_delta},
          {"icp_max_correspondence_dist", cfg.icp_max_correspondence_dist},
          {"trim_normal_threshold", cfg.trim_normal_threshold}};
}

RegistrationConfig config_from_json(const nlohmann::json& j) {
  RegistrationConfig cfg;
  try {
    cfg.icp_max_iterations = j.value("icp_max_iterations", cfg.icp_max_iterations);
    cfg.icp_convergence_delta = j.value("icp_convergence_delta", cfg.icp_convergence_delta);
    cfg.icp_max_correspondence_dist =
        j.value("icp_max_correspondence_dist", cfg.icp_max_correspondence_dist);
    cfg.trim_normal_threshold = j.value("trim_normal_threshold", cfg.trim_normal_threshold);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("registration config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PointCloud trim_reachable(const PointCloud& pre, const UnitVector3& approach,
                          const RegistrationConfig& cfg) {
  if (!pre.has_normals()) throw Error(ErrorCode::MissingNormals, "trimming needs model normals");
  pre.validate();
  PointCloud out;
  const Eigen::Vector3d toward_viewer = -approach.vec();
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (pre.normals[i].dot(toward_viewer) > cfg.trim_normal_threshold) {
      out.points.push_back(pre.points[i]);
      out.normals.push_back(pre.normals[i]);
    }
  }
  return out;
}

PointCloud trim_by_mask(const PointCloud& pre, const std::vector<bool>& keep) {
  if (keep.size() != pre.size()) {
    throw Error(ErrorCode::MismatchedLengths, "keep-mask length differs from cloud size");
  }
  PointCloud out;
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (!keep[i]) continue;
    out.points.push_back(pre.points[i]);
    if (pre.has_normals()) out.normals.push_back(pre.normals[i]);
  }
  return out;
}

PrincipalAxes pca_axes(std::span<const Point3> points) {
  if (points.size() < 3 || is_collinear(points)) {
    throw Error(ErrorCode::DegenerateGeometry, "PCA needs at least 3 non-collinear points");
  }
  PrincipalAxes out;
  out.centroid = centroid(points);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - out.centroid;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  for (int k = 0; k < 3; ++k) {
    const int col = 2 - k;  // solver sorts ascending
    out.eigenvalues(k) = std::max(0.0, eig.eigenvalues()(col));
    Eigen::Vector3d axis = eig.eigenvectors().col(col).normalized();

    double extreme = 0.0;
    for (const auto& p : points) {
      const double proj = axis.dot(p - out.centroid);
      if (std::abs(proj) > std::abs(extreme)) extreme = proj;
    }
    if (extreme < 0.0) axis = -axis;
    out.axes[k] = UnitVector3::assume_normalized(axis);
  }
  return out;
}

ExtremeTriple extreme_points(std::span<const Point3> points, const PrincipalAxes& axes) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "extreme points of an empty cloud");
  std::size_t i_max = 0, i_min = 0, i_abs = 0;
  double v_max = -std::numeric_limits<double>::infinity();
  double v_min = std::numeric_limits<double>::infinity();
  double v_abs = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3d d = points[i] - axes.centroid;
    const double p1 = axes.pa1().dot(d);
    const double p2 = std::abs(axes.pa2().dot(d));
    if (p1 > v_max) { v_max = p1; i_max = i; }
    if (p1 < v_min) { v_min = p1; i_min = i; }
    if (p2 > v_abs) { v_abs = p2; i_abs = i; }
  }
  return {points[i_max], points[i_min], points[i_abs], {i_max, i_min, i_abs}};
}

namespace {

std::pair<RigidTransform, RigidTransform> fit_configurations(std::vector<Point3> intra,
                                                             std::vector<Point3> pre) {
  const auto first = absolute_orientation(intra, pre);
  std::swap(pre[0], pre[1]);
  const auto second = absolute_orientation(intra, pre);
  return {first, second};
}

}  // namespace

std::pair<RigidTransform, RigidTransform> coarse_registrations(const ExtremeTriple& intra,
                                                               const ExtremeTriple& pre) {
  return fit_configurations({intra.e1, intra.e2, intra.e3}, {pre.e1, pre.e2, pre.e3});
}

std::pair<RigidTransform, RigidTransform> coarse_registrations(const ExtremeTriple& intra,
                                                               const ExtremeTriple& pre,
                                                               const Point3& intra_centroid,
                                                               const Point3& pre_centroid) {
  return fit_configurations({intra.e1, intra.e2, intra.e3, intra_centroid},
                            {pre.e1, pre.e2, pre.e3, pre_centroid});
}

IcpResult icp(std::span<const Point3> source, const kernels::KdTree& target,
              const RigidTransform& init, const RegistrationConfig& cfg) {
  cfg.validate();
  if (source.size() < 3) throw Error(ErrorCode::DegenerateGeometry, "ICP source needs >= 3 points");

  IcpResult out;
  out.transform = init;
  auto corr = kernels::match_parallel(source, init, target, cfg.icp_max_correspondence_dist);
  if (corr.matched == 0) {
    throw Error(ErrorCode::NoCorrespondences, "no target point within the correspondence gate");
  }
  out.final_rmse = corr.rmse;
  out.matched = corr.matched;
  out.rmse_history.push_back(corr.rmse);

  std::vector<Point3> src, dst;
  for (int it = 0; it < cfg.icp_max_iterations; ++it) {
    src.clear();
    dst.clear();
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (corr.target[i] < 0) continue;
      src.push_back(source[i]);
      dst.push_back(target.points()[static_cast<std::size_t>(corr.target[i])]);
    }
    if (src.size() < 3 || is_collinear(src)) break;

    const RigidTransform candidate = absolute_orientation(src, dst);
    auto next = kernels::match_parallel(source, candidate, target, cfg.icp_max_correspondence_dist);
    if (next.matched == 0 || next.rmse > out.final_rmse) break;

    const double improvement = out.final_rmse - next.rmse;
    out.transform = candidate;
    out.final_rmse = next.rmse;
    out.matched = next.matched;
    out.rmse_history.push_back(next.rmse);
    ++out.iterations;
    corr = std::move(next);
    if (improvement < cfg.icp_convergence_delta) break;
  }
  return out;
}

IcpResult icp(const PointCloud& source, const PointCloud& target, const RigidTransform& init,
              const RegistrationConfig& cfg) {
  if (target.empty()) throw Error(ErrorCode::EmptyInput, "ICP target is empty");
  const kernels::KdTree index(target.points);
  return icp(source.points, index, init, cfg);
}

RegistrationResult register_trimmed(const PointCloud& intra, const PointCloud& trimmed_model,
                                    const RegistrationConfig& cfg) {
  cfg.validate();
  if (trimmed_model.size() < 3) {
    throw Error(ErrorCode::EmptyInput, "trimmed model has fewer than 3 points");
  }
  RegistrationResult result;
  result.intra_points = intra.size();
  result.trimmed_model_points = trimmed_model.size();

  const auto intra_axes = pca_axes(intra.points);
  const auto pre_axes = pca_axes(trimmed_model.points);
  const auto intra_ext = extreme_points(intra.points, intra_axes);
  const auto pre_ext = extreme_points(trimmed_model.points, pre_axes);

  if (intra_ext.has_duplicate()) {
    result.warnings.push_back("intra e3 coincides with e1 or e2");
  }
  if (pre_ext.has_duplicate()) {
    result.warnings.push_back("model e3 coincides with e1 or e2");
  }

  const auto intra_triple = intra_ext.points();
  const auto pre_triple = pre_ext.points();
  std::pair<RigidTransform, RigidTransform> coarse;
  if (is_collinear(intra_triple) || is_collinear(pre_triple)) {
    result.warnings.push_back("degenerate extreme-point triple; centroids added to coarse fit");
    coarse = coarse_registrations(intra_ext, pre_ext, intra_axes.centroid, pre_axes.centroid);
  } else {
    coarse = coarse_registrations(intra_ext, pre_ext);
  }

  const kernels::KdTree index(trimmed_model.points);
  result.configurations[0] = {coarse.first, icp(intra.points, index, coarse.first, cfg)};
  result.configurations[1] = {coarse.second, icp(intra.points, index, coarse.second, cfg)};

  const auto& c1 = result.configurations[0].fine;
  const auto& c2 = result.configurations[1].fine;
  result.chosen_configuration = c2.final_rmse < c1.final_rmse ? 2 : 1;
  const auto& chosen = result.configurations[result.chosen_configuration - 1].fine;
  result.transform = chosen.transform;
  result.final_rmse = chosen.final_rmse;
  return result;
}

RegistrationResult register_surface(const PointCloud& intra, const PointCloud& pre_model,
                                    const UnitVector3& approach, const RegistrationConfig& cfg) {
  return register_trimmed(intra, trim_reachable(pre_model, approach, cfg), cfg);
}

nlohmann::json to_json(const RegistrationResult& result) {
  nlohmann::json configs = nlohmann::json::array();
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& c = result.configurations[i];
    configs.push_back({{"configuration", i + 1},
                       {"coarse_transform", io::to_json(c.coarse)},
                       {"transform", io::to_json(c.fine.transform)},
                       {"final_rmse_mm", c.fine.final_rmse},
                       {"iterations", c.fine.iterations},
                       {"matched_points", c.fine.matched},
                       {"rmse_history_mm", c.fine.rmse_history}});
  }
  return {{"transform", io::to_json(result.transform)},
          {"final_rmse_mm", result.final_rmse},
          {"chosen_configuration", result.chosen_configuration},
          {"configuration_rmse_mm",
           {result.configurations[0].fine.final_rmse, result.configurations[1].fine.final_rmse}},
          {"iterations",
           {result.configurations[0].fine.iterations, result.configurations[1].fine.iterations}},
          {"intra_points", result.intra_points},
          {"trimmed_model_points", result.trimmed_model_points},
          {"configurations", configs},
          {"warnings", result.warnings}};
}

}  // namespace spinenav::registration

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "spinenav/core/geometry.hpp"
#include "spinenav/registration/registration.hpp"
#include "spinenav/sim/digitization.hpp"
#include "spinenav/sim/phantom.hpp"
#include "spinenav/sim/random.hpp"
#include "support/oracles.hpp"

using namespace spinenav;
using namespace spinenav::registration;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

const sim::PhantomSpec& phantom() {
  static const sim::PhantomSpec spec = sim::generate_phantom(11);
  return spec;
}

double translation_error(const RigidTransform& a, const RigidTransform& b) {
  return (a.translation() - b.translation()).norm();
}

double rotation_error_deg(const RigidTransform& a, const RigidTransform& b) {
  return (a * b.inverse()).rotation_angle_deg();
}

PointCloud sphere_cloud(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  PointCloud pc;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d v = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    pc.points.push_back(30.0 * v);
    pc.normals.push_back(UnitVector3(v));
  }
  return pc;
}

std::vector<Point3> random_cloud(std::mt19937_64& rng, int n, const Eigen::Vector3d& scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(scale.x() * g(rng), scale.y() * g(rng), scale.z() * g(rng));
  return pts;
}

// Exhaustive restatement of the landmark rule with a strict-improvement scan
// written independently of the library loop.
std::array<std::size_t, 3> scan_extremes(const std::vector<Point3>& pts, const PrincipalAxes& ax) {
  std::vector<double> p1(pts.size()), p2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    p1[i] = ax.pa1().dot(pts[i] - ax.centroid);
    p2[i] = std::abs(ax.pa2().dot(pts[i] - ax.centroid));
  }
  const auto hi = *std::max_element(p1.begin(), p1.end());
  const auto lo = *std::min_element(p1.begin(), p1.end());
  const auto side = *std::max_element(p2.begin(), p2.end());
  auto first = [](const std::vector<double>& v, double x) {
    return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
  };
  return {first(p1, hi), first(p1, lo), first(p2, side)};
}

}  // namespace

TEST_CASE("trimming keeps exactly the points facing the surgeon") {
  const UnitVector3 approach(0, 0, -1);
  PointCloud facing, hidden;
  for (int i = 0; i < 10; ++i) {
    facing.points.emplace_back(i, 0, 0);
    facing.normals.push_back(UnitVector3(0, 0, 1));
    hidden.points.emplace_back(i, 0, 0);
    hidden.normals.push_back(UnitVector3(0, 0, -1));
  }
  CHECK(trim_reachable(facing, approach, {}).size() == 10);
  CHECK(trim_reachable(hidden, approach, {}).empty());

  std::mt19937_64 rng(5);
  const PointCloud sphere = sphere_cloud(4000, rng);
  const PointCloud kept = trim_reachable(sphere, approach, {});
  std::vector<Point3> expected;
  for (std::size_t i = 0; i < sphere.size(); ++i) {
    if (sphere.normals[i].vec().z() > 0.0) expected.push_back(sphere.points[i]);
  }
  REQUIRE(kept.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(kept.points[i] == expected[i]);
  for (const auto& p : kept.points) CHECK(p.z() > 0.0);

  RegistrationConfig strict;
  strict.trim_normal_threshold = 0.5;
  for (const auto& n : trim_reachable(sphere, approach, strict).normals) CHECK(n.z() > 0.5);

  PointCloud bare;
  bare.points = sphere.points;
  CHECK(code_of([&] { trim_reachable(bare, approach, {}); }) == ErrorCode::MissingNormals);
}

TEST_CASE("mask trimming") {
  std::mt19937_64 rng(6);
  const PointCloud sphere = sphere_cloud(50, rng);
  std::vector<bool> keep(50);
  for (int i = 0; i < 50; ++i) keep[i] = i % 3 == 0;
  const PointCloud out = trim_by_mask(sphere, keep);
  REQUIRE(out.size() == 17);
  CHECK(out.points[4] == sphere.points[12]);
  CHECK(out.normals.size() == 17);
  keep.pop_back();
  CHECK(code_of([&] { trim_by_mask(sphere, keep); }) == ErrorCode::MismatchedLengths);
}

TEST_CASE("PCA on a dominant axis") {
  std::vector<Point3> pts;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  for (int i = 0; i <= 20; ++i) pts.emplace_back(-1.0 + 0.1 * i, jitter(rng), jitter(rng));
  const auto ax = pca_axes(pts);
  CHECK(std::abs(std::abs(ax.pa1().x()) - 1.0) < 1e-6);
}

TEST_CASE("PCA of an isotropic cloud has near-equal eigenvalues") {
  std::mt19937_64 rng(8);
  const auto pts = random_cloud(rng, 50000, {5, 5, 5});
  const auto ax = pca_axes(pts);
  CHECK(ax.eigenvalues(2) > 0.9 * ax.eigenvalues(0));
}

TEST_CASE("PCA reconstructs the covariance and fixes axis signs") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = random_cloud(rng, 300, {20, 8, 3});
    const Eigen::Matrix3d rot = oracle::random_rotation(rng);
    const Eigen::Vector3d shift = oracle::random_vec(rng, -100, 100);
    for (auto& p : pts) p = rot * p + shift;
    const auto ax = pca_axes(pts);

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
    cov /= static_cast<double>(pts.size());

    Eigen::Matrix3d rebuilt = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 3; ++k) rebuilt += ax.eigenvalues(k) * ax.axes[k].vec() * ax.axes[k].vec().transpose();
    CHECK((rebuilt - cov).cwiseAbs().maxCoeff() < 1e-9 * cov.norm());
    CHECK(ax.eigenvalues(0) >= ax.eigenvalues(1));
    CHECK(ax.eigenvalues(1) >= ax.eigenvalues(2));
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) CHECK(std::abs(ax.axes[a].dot(ax.axes[b].vec())) < 1e-9);
      double extreme = 0.0;
      for (const auto& p : pts) {
        const double proj = ax.axes[a].dot(p - mean);
        if (std::abs(proj) > std::abs(extreme)) extreme = proj;
      }
      CHECK(extreme > 0.0);
    }
  }
  const std::vector<Point3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {5, 5, 5}};
  CHECK(code_of([&] { pca_axes(line); }) == ErrorCode::DegenerateGeometry);
  const std::vector<Point3> two{{0, 0, 0}, {1, 0, 0}};
  CHECK(code_of([&] { pca_axes(two); }) == ErrorCode::DegenerateGeometry);
}

TEST_CASE("extreme points on a forced configuration") {
  const std::vector<Point3> pts{{-1, 0, 0}, {1, 0, 0}, {0, 0.6, 0}, {0, -0.5, 0}};
  PrincipalAxes ax;
  ax.axes = {UnitVector3(1, 0, 0), UnitVector3(0, 1, 0), UnitVector3(0, 0, 1)};
  ax.centroid = centroid(pts);
  const auto e = extreme_points(pts, ax);
  CHECK(e.e1 == Point3(1, 0, 0));
  CHECK(e.e2 == Point3(-1, 0, 0));
  CHECK(e.e3 == Point3(0, 0.6, 0));
  CHECK_FALSE(e.has_duplicate());

  // One point dominates both criteria.
  const std::vector<Point3> skew{{10, 10, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  PrincipalAxes diag;
  diag.axes = {UnitVector3(1, 0, 0), UnitVector3(0, 1, 0), UnitVector3(0, 0, 1)};
  diag.centroid = Point3::Zero();
  const auto d = extreme_points(skew, diag);
  CHECK(d.indices[0] == 0);
  CHECK(d.indices[2] == 0);
  CHECK(d.has_duplicate());

  CHECK(code_of([&] { extreme_points(std::vector<Point3>{}, ax); }) == ErrorCode::EmptyInput);
}

TEST_CASE("extreme points agree with an exhaustive scan") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    auto pts = random_cloud(rng, 500, {15, 6, 4});
    // Duplicate a few points so ties occur.
    for (int k = 0; k < 5; ++k) pts.push_back(pts[static_cast<std::size_t>(k * 37)]);
    const auto ax = pca_axes(pts);
    const auto e = extreme_points(pts, ax);
    const auto expect = scan_extremes(pts, ax);
    CHECK(e.indices == expect);
    CHECK(e.e1 == pts[expect[0]]);
    CHECK(e.e2 == pts[expect[1]]);
    CHECK(e.e3 == pts[expect[2]]);
  }
}

TEST_CASE("coarse registration on identical triples") {
  std::mt19937_64 rng(12);
  const auto pts = random_cloud(rng, 200, {20, 8, 3});
  const auto e = extreme_points(pts, pca_axes(pts));
  const auto [c1, c2] = coarse_registrations(e, e);
  CHECK(c1.rotation_angle_deg() < 1e-9);
  CHECK(c1.translation().norm() < 1e-9);
  CHECK(c2.rotation_angle_deg() > 1.0);
}

TEST_CASE("coarse configuration 1 recovers a random rigid motion") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    ExtremeTriple pre;
    pre.e1 = oracle::random_vec(rng, -50, 50);
    pre.e2 = oracle::random_vec(rng, -50, 50);
    pre.e3 = oracle::random_vec(rng, -50, 50);
    const RigidTransform truth(oracle::random_rotation(rng), oracle::random_vec(rng, -100, 100));
    ExtremeTriple intra;
    intra.e1 = truth.apply(pre.e1);
    intra.e2 = truth.apply(pre.e2);
    intra.e3 = truth.apply(pre.e3);
    const auto c1 = coarse_registrations(intra, pre).first;
    const RigidTransform expected = truth.inverse();
    CHECK(rotation_error_deg(c1, expected) < 1e-9);
    CHECK(translation_error(c1, expected) < 1e-9);
  }
}

TEST_CASE("coarse configuration 2 absorbs a flipped first axis") {
  // The intra cloud is the model turned 180 degrees about pa2 through the
  // centroid, and its pa1 sign came out the other way, so e1 and e2 trade
  // places. Configuration 2 must return that half-turn exactly.
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pre_pts = random_cloud(rng, 400, {25, 10, 4});
    const auto pre_ax = pca_axes(pre_pts);
    const auto flip = RigidTransform::rotation_about(pre_ax.pa2().vec(), std::acos(-1.0), pre_ax.centroid);
    const auto intra_pts = apply_transform(flip, std::span<const Point3>(pre_pts));

    PrincipalAxes flipped = pca_axes(intra_pts);
    flipped.axes[0] = -flipped.axes[0];
    const auto intra = extreme_points(intra_pts, flipped);
    const auto pre = extreme_points(pre_pts, pre_ax);
    REQUIRE((intra.e1 - flip.apply(pre.e2)).norm() < 1e-9);

    const auto [c1, c2] = coarse_registrations(intra, pre);
    const RigidTransform expected = flip.inverse();
    CHECK(rotation_error_deg(c2, expected) < 1e-6);
    CHECK(translation_error(c2, expected) < 1e-6);
    CHECK(rotation_error_deg(c1, expected) > 1.0);
    CHECK(is_proper_rotation(c1.rotation()));
    CHECK(is_proper_rotation(c2.rotation()));
  }
}

TEST_CASE("coarse registration rejects coincident landmarks") {
  ExtremeTriple t;
  t.e1 = t.e2 = t.e3 = Point3(1, 2, 3);
  CHECK(code_of([&] { coarse_registrations(t, t); }) == ErrorCode::DegenerateGeometry);
}

TEST_CASE("ICP on an aligned subset converges immediately") {
  const PointCloud target = phantom().model_cloud();
  PointCloud source;
  for (std::size_t i = 0; i < target.size(); i += 40) source.points.push_back(target.points[i]);
  const auto r = icp(source, target, RigidTransform::identity(), {});
  CHECK(r.final_rmse < 1e-9);
  CHECK(r.iterations == 1);
  CHECK(r.transform.rotation_angle_deg() < 1e-9);
  CHECK(r.matched == source.size());
}

TEST_CASE("ICP recovers a small perturbation on a dense target") {
  const PointCloud target = phantom().model_cloud();
  REQUIRE(target.size() >= 5000);
  sim::Rng rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    const UnitVector3 axis = sim::random_direction(rng);
    const Eigen::Vector3d shift = 2.0 * sim::random_direction(rng).vec();
    const RigidTransform perturb = RigidTransform::translation(shift) *
                                   RigidTransform::rotation_about(axis.vec(), deg_to_rad(5.0), Point3::Zero());
    PointCloud source;
    for (std::size_t i = static_cast<std::size_t>(trial); i < target.size(); i += 20) {
      source.points.push_back(perturb.apply(target.points[i]));
    }
    const auto r = icp(source, target, RigidTransform::identity(), {});
    const RigidTransform expected = perturb.inverse();
    CHECK(rotation_error_deg(r.transform, expected) < 0.1);
    CHECK(translation_error(r.transform, expected) < 0.1);
  }
}

TEST_CASE("ICP residual under 0.5 mm measurement noise") {
  const PointCloud target = phantom().model_cloud();
  sim::Rng rng(16);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloud source;
    for (std::size_t i = static_cast<std::size_t>(trial); i < target.size(); i += 30) {
      source.points.push_back(target.points[i] + Eigen::Vector3d(sim::gaussian(rng, 0.5), sim::gaussian(rng, 0.5),
                                                                  sim::gaussian(rng, 0.5)));
    }
    const auto r = icp(source, target, RigidTransform::identity(), {});
    CHECK(r.final_rmse >= 0.3);
    CHECK(r.final_rmse <= 0.8);
  }
}

TEST_CASE("ICP RMSE history never increases") {
  const PointCloud target = phantom().model_cloud();
  sim::Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const RigidTransform perturb =
        RigidTransform::translation(5.0 * sim::random_direction(rng).vec()) *
        RigidTransform::rotation_about(sim::random_direction(rng).vec(), deg_to_rad(sim::uniform(rng, 5, 25)));
    PointCloud source;
    for (std::size_t i = static_cast<std::size_t>(trial); i < target.size(); i += 50) {
      source.points.push_back(perturb.apply(target.points[i]) +
                              Eigen::Vector3d(sim::gaussian(rng, 1.0), sim::gaussian(rng, 1.0), 0.0));
    }
    const auto r = icp(source, target, RigidTransform::identity(), {});
    REQUIRE(r.rmse_history.size() == static_cast<std::size_t>(r.iterations) + 1);
    for (std::size_t k = 1; k < r.rmse_history.size(); ++k) CHECK(r.rmse_history[k] <= r.rmse_history[k - 1]);
    CHECK(r.final_rmse == r.rmse_history.back());
    CHECK(r.iterations <= RegistrationConfig{}.icp_max_iterations);
  }
}

TEST_CASE("ICP errors") {
  const PointCloud target = phantom().model_cloud();
  PointCloud far;
  for (int i = 0; i < 10; ++i) far.points.emplace_back(1000.0 + i, 1000.0, 0.0);
  CHECK(code_of([&] { icp(far, target, RigidTransform::identity(), {}); }) == ErrorCode::NoCorrespondences);
  PointCloud two;
  two.points = {target.points[0], target.points[1]};
  CHECK(code_of([&] { icp(two, target, RigidTransform::identity(), {}); }) == ErrorCode::DegenerateGeometry);
  CHECK(code_of([&] { icp(far, PointCloud{}, RigidTransform::identity(), {}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("registration config validation and JSON") {
  RegistrationConfig cfg;
  cfg.icp_max_iterations = 7;
  cfg.trim_normal_threshold = 0.25;
  const auto back = config_from_json(to_json(cfg));
  CHECK(back.icp_max_iterations == 7);
  CHECK(back.trim_normal_threshold == 0.25);
  CHECK(config_from_json(nlohmann::json::object()).icp_max_correspondence_dist == 20.0);
  CHECK(code_of([] { config_from_json({{"icp_max_iterations", 0}}); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { config_from_json({{"trim_normal_threshold", 1.5}}); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { config_from_json({{"icp_convergence_delta", "x"}}); }) == ErrorCode::ParseError);
}

TEST_CASE("self-registration returns the identity") {
  const auto& spec = phantom();
  const PointCloud trimmed = trim_reachable(spec.model_cloud(), spec.approach, {});
  const auto r = register_surface(trimmed, spec.model_cloud(), spec.approach, {});
  CHECK(r.transform.rotation_angle_deg() < 1e-6);
  CHECK(r.transform.translation().norm() < 1e-6);
  CHECK(r.final_rmse < 1e-6);
  CHECK(r.chosen_configuration == 1);
  CHECK(r.trimmed_model_points == trimmed.size());
}

TEST_CASE("registration selects the smaller RMSE and stays proper") {
  const auto& spec = phantom();
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    sim::DigitizationSim d;
    d.seed = seed;
    const auto dig = sim::simulate_digitization(spec, d);
    const auto r = register_surface(dig.cloud, spec.model_cloud(), spec.approach, {});
    const double r1 = r.configurations[0].fine.final_rmse;
    const double r2 = r.configurations[1].fine.final_rmse;
    CHECK(r.final_rmse == std::min(r1, r2));
    CHECK(r.chosen_configuration == (r2 < r1 ? 2 : 1));
    for (const auto& c : r.configurations) CHECK(is_proper_rotation(c.fine.transform.rotation()));
    CHECK(is_proper_rotation(r.transform.rotation()));
  }
}

TEST_CASE("registration is equivariant under rigid motion of the intra cloud") {
  const auto& spec = phantom();
  const auto dig = sim::simulate_digitization(spec, {});
  const auto base = register_surface(dig.cloud, spec.model_cloud(), spec.approach, {});
  sim::Rng rng(18);
  for (int trial = 0; trial < 5; ++trial) {
    const RigidTransform move = sim::random_pose(rng, 200.0);
    const auto moved = register_surface(apply_transform(move, dig.cloud), spec.model_cloud(), spec.approach, {});
    const RigidTransform expected = base.transform * move.inverse();
    CHECK(rotation_error_deg(moved.transform, expected) < 1e-6);
    CHECK(translation_error(moved.transform, expected) < 1e-6);
    CHECK(moved.final_rmse == doctest::Approx(base.final_rmse).epsilon(1e-9));
  }
}

TEST_CASE("symmetric cloud still yields a proper best-RMSE transform") {
  // Ellipsoid samples are symmetric under a half-turn about any principal
  // axis, so both configurations fit equally well.
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g(0.0, 1.0);
  PointCloud model;
  for (int i = 0; i < 20000; ++i) {
    const Eigen::Vector3d v = Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    model.points.emplace_back(30 * v.x(), 12 * v.y(), 8 * v.z());
    model.normals.push_back(UnitVector3(v.x() / 30, v.y() / 12, v.z() / 8));
  }
  const PointCloud trimmed = trim_reachable(model, UnitVector3(0, 0, -1), {});
  PointCloud intra;
  for (std::size_t i = 0; i < trimmed.size(); i += 7) intra.points.push_back(trimmed.points[i]);
  sim::Rng pose_rng(20);
  const RigidTransform pose = sim::random_pose(pose_rng, 50.0);
  const auto r = register_trimmed(apply_transform(pose, intra), trimmed, {});
  const double r1 = r.configurations[0].fine.final_rmse;
  const double r2 = r.configurations[1].fine.final_rmse;
  CHECK(r.final_rmse == std::min(r1, r2));
  CHECK(is_proper_rotation(r.transform.rotation()));
  CHECK(is_proper_rotation(r.configurations[0].fine.transform.rotation()));
  CHECK(is_proper_rotation(r.configurations[1].fine.transform.rotation()));
  CHECK(r.final_rmse < 0.5);
}

TEST_CASE("duplicate landmark produces a warning") {
  // A flat fan where the farthest point along pa1 is also farthest from it.
  PointCloud model;
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 10; ++j) {
      model.points.emplace_back(i, 0.1 * j * i / 40.0, 0.0);
      model.normals.push_back(UnitVector3(0, 0, 1));
    }
  }
  model.points.emplace_back(80, 10, 0);
  model.normals.push_back(UnitVector3(0, 0, 1));
  const auto r = register_trimmed(model, model, {});
  CHECK_FALSE(r.warnings.empty());
  CHECK(r.final_rmse < 1e-6);
}

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "spinenav/core/geometry.hpp"
#include "spinenav/core/io.hpp"
#include "spinenav/registration/registration.hpp"
#include "spinenav/sim/digitization.hpp"
#include "spinenav/sim/evaluate.hpp"
#include "spinenav/sim/experiment.hpp"
#include "spinenav/sim/phantom.hpp"
#include "spinenav/sim/random.hpp"
#include "spinenav/sim/stereo_sim.hpp"
#include "support/oracles.hpp"

using namespace spinenav;
using namespace spinenav::sim;

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

const PhantomSpec& phantom() {
  static const PhantomSpec spec = generate_phantom(3);
  return spec;
}

std::string mesh_bytes(const TriangleMesh& mesh) {
  std::ostringstream os;
  io::write_ply(os, mesh);
  return os.str();
}

// Faces bucketed by centroid on a coarse grid, for nearby-triangle queries.
class FaceGrid {
 public:
  FaceGrid(const TriangleMesh& mesh, double cell) : mesh_(mesh), cell_(cell) {
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      const auto& [a, b, c] = mesh.faces[f];
      buckets_[key((mesh.vertices[a] + mesh.vertices[b] + mesh.vertices[c]) / 3.0)].push_back(f);
    }
  }

  /// Signed distance to the closest triangle within two cells, positive on
  /// the side the triangle's normal points to.
  double signed_distance(const Point3& p) const {
    const auto [i, j, k] = key(p);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_face = 0;
    for (int di = -2; di <= 2; ++di) {
      for (int dj = -2; dj <= 2; ++dj) {
        for (int dk = -2; dk <= 2; ++dk) {
          const auto it = buckets_.find({i + di, j + dj, k + dk});
          if (it == buckets_.end()) continue;
          for (auto f : it->second) {
            const auto& [a, b, c] = mesh_.faces[f];
            const double d =
                oracle::point_triangle_distance(p, mesh_.vertices[a], mesh_.vertices[b], mesh_.vertices[c]);
            if (d < best) {
              best = d;
              best_face = f;
            }
          }
        }
      }
    }
    const auto& face = mesh_.faces[best_face];
    const Eigen::Vector3d n = (mesh_.vertices[face[1]] - mesh_.vertices[face[0]])
                                  .cross(mesh_.vertices[face[2]] - mesh_.vertices[face[0]]);
    return n.dot(p - mesh_.vertices[face[0]]) >= 0.0 ? best : -best;
  }

 private:
  using Key = std::tuple<int, int, int>;
  Key key(const Point3& p) const {
    return {static_cast<int>(std::floor(p.x() / cell_)), static_cast<int>(std::floor(p.y() / cell_)),
            static_cast<int>(std::floor(p.z() / cell_))};
  }
  const TriangleMesh& mesh_;
  double cell_;
  std::map<Key, std::vector<std::size_t>> buckets_;
};

TriangleMesh box(double half) {
  TriangleMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.emplace_back(i & 1 ? half : -half, i & 2 ? half : -half, i & 4 ? half : -half);
  }
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

// Rings of equally spaced points at random heights and phases, head first.
PointCloud cylinder_samples(std::mt19937_64& rng, int rings, int per_ring, double radius, double length,
                            double noise) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  std::uniform_real_distribution<double> phase(0.0, two_pi), height(0.0, length);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> hs;
  for (int i = 0; i < rings; ++i) hs.push_back(height(rng));
  std::sort(hs.begin(), hs.end());
  PointCloud pc;
  for (double h : hs) {
    const double p0 = phase(rng);
    for (int k = 0; k < per_ring; ++k) {
      const double a = p0 + two_pi * k / per_ring;
      pc.points.emplace_back(radius * std::cos(a) + noise * g(rng), radius * std::sin(a) + noise * g(rng),
                             h + noise * g(rng));
    }
  }
  return pc;
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Same structure, numbers within a relative 1e-9.
void compare_json(const nlohmann::json& got, const nlohmann::json& want, const std::string& path) {
  INFO(path);
  if (want.is_number() && got.is_number()) {
    CHECK(relative_gap(got.get<double>(), want.get<double>()) < 1e-9);
    return;
  }
  REQUIRE(got.type() == want.type());
  if (want.is_object()) {
    REQUIRE(got.size() == want.size());
    for (auto it = want.begin(); it != want.end(); ++it) {
      REQUIRE(got.contains(it.key()));
      compare_json(got.at(it.key()), it.value(), path + "." + it.key());
    }
  } else if (want.is_array()) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) compare_json(got[i], want[i], path + "[" + std::to_string(i) + "]");
  } else {
    CHECK(got == want);
  }
}

}  // namespace

TEST_CASE("phantom generation is deterministic") {
  const auto a = generate_phantom(42);
  const auto b = generate_phantom(42);
  CHECK(mesh_bytes(a.mesh) == mesh_bytes(b.mesh));
  CHECK(a.model_points.points == b.model_points.points);
  CHECK(io::to_json(a.ground_truth_pose) == io::to_json(b.ground_truth_pose));
  CHECK(mesh_bytes(generate_phantom(43).mesh) != mesh_bytes(a.mesh));
}

TEST_CASE("phantom mesh is watertight and consistently wound") {
  const auto& mesh = phantom().mesh;
  CHECK_NOTHROW(mesh.validate());
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) ++directed[{f[e], f[(e + 1) % 3]}];
  }
  bool ok = true;
  for (const auto& [edge, count] : directed) {
    const auto twin = directed.find({edge.second, edge.first});
    if (count != 1 || twin == directed.end() || twin->second != 1) ok = false;
  }
  CHECK(ok);
  // Euler characteristic of a sphere.
  const auto v = static_cast<long>(mesh.vertices.size());
  const auto f = static_cast<long>(mesh.faces.size());
  const long e = static_cast<long>(directed.size()) / 2;
  CHECK(v - e + f == 2);
  // Outward winding: positive enclosed volume.
  double volume = 0.0;
  for (const auto& face : mesh.faces) {
    volume += mesh.vertices[face[0]].dot(mesh.vertices[face[1]].cross(mesh.vertices[face[2]])) / 6.0;
  }
  CHECK(volume > 0.0);
}

TEST_CASE("phantom is elongated") {
  // Surface covariance from exact per-triangle moments:
  // integral of x x^T over a triangle = A / 12 (sum v v^T + s s^T), s = sum v.
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const auto spec = generate_phantom(seed);
    double area = 0.0;
    Eigen::Vector3d first = Eigen::Vector3d::Zero();
    Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
    for (const auto& f : spec.mesh.faces) {
      const Point3 &a = spec.mesh.vertices[f[0]], &b = spec.mesh.vertices[f[1]], &c = spec.mesh.vertices[f[2]];
      const double A = 0.5 * (b - a).cross(c - a).norm();
      const Eigen::Vector3d s = a + b + c;
      area += A;
      first += A * s / 3.0;
      second += A / 12.0 * (a * a.transpose() + b * b.transpose() + c * c.transpose() + s * s.transpose());
    }
    const Eigen::Vector3d mean = first / area;
    const Eigen::Matrix3d cov = second / area - mean * mean.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    CHECK(eig.eigenvalues()(2) > 2.0 * eig.eigenvalues()(1));

    // The sampled model cloud sees the same shape.
    const auto sampled = registration::pca_axes(spec.model_points.points);
    CHECK(sampled.eigenvalues(0) > 2.0 * sampled.eigenvalues(1));
    CHECK(std::abs(std::abs(sampled.pa1().dot(eig.eigenvectors().col(2))) - 1.0) < 1e-3);
  }
}

TEST_CASE("reachable area fraction") {
  const auto& spec = phantom();
  double reachable = 0.0, total = 0.0;
  for (std::size_t f = 0; f < spec.mesh.faces.size(); ++f) {
    const auto& [a, b, c] = spec.mesh.faces[f];
    const double area =
        0.5 * (spec.mesh.vertices[b] - spec.mesh.vertices[a]).cross(spec.mesh.vertices[c] - spec.mesh.vertices[a]).norm();
    total += area;
    const int r = spec.face_region[f];
    CHECK(r >= -1);
    CHECK(r < static_cast<int>(spec.region_names.size()));
    if (r >= 0) reachable += area;
  }
  CHECK(reachable / total > 0.10);
  CHECK(reachable / total < 0.60);
  CHECK(spec.reachable_area() == doctest::Approx(reachable).epsilon(1e-9));
  CHECK(spec.mesh.total_area() == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("planned entry points lie on the mesh") {
  for (std::uint64_t seed : {3u, 9u, 27u}) {
    const auto spec = generate_phantom(seed);
    REQUIRE(spec.plans.size() == 2);
    for (const auto& plan : spec.plans) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& f : spec.mesh.faces) {
        best = std::min(best, oracle::point_triangle_distance(plan.entry_point, spec.mesh.vertices[f[0]],
                                                              spec.mesh.vertices[f[1]], spec.mesh.vertices[f[2]]));
      }
      CHECK(best < 0.5);
      CHECK(plan.planned_length > 0.0);
    }
  }
}

TEST_CASE("phantom parameter validation") {
  PhantomParams p;
  p.latitude_steps = 2;
  CHECK(code_of([&] { generate_phantom(1, p); }) == ErrorCode::InvalidParams);
  p = PhantomParams{};
  p.body_semi_axes.y() = 0.0;
  CHECK(code_of([&] { generate_phantom(1, p); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { phantom_params_from_json({{"lobe_width_rad", -1.0}}); }) == ErrorCode::InvalidParams);
  const auto back = phantom_params_from_json(to_json(PhantomParams{}));
  CHECK(to_json(back) == to_json(PhantomParams{}));
}

TEST_CASE("noiseless digitization lies on the posed surface") {
  const auto& spec = phantom();
  DigitizationSim d;
  d.noise_sigma = 0.0;
  const auto dig = simulate_digitization(spec, d);
  const RigidTransform to_model = spec.ground_truth_pose.inverse();
  REQUIRE(dig.model_point_ids.size() == dig.cloud.size());
  for (std::size_t i = 0; i < dig.cloud.size(); ++i) {
    const Point3 p = to_model.apply(dig.cloud.points[i]);
    const auto& f = spec.mesh.faces[spec.model_point_face[dig.model_point_ids[i]]];
    CHECK(oracle::point_triangle_distance(p, spec.mesh.vertices[f[0]], spec.mesh.vertices[f[1]],
                                          spec.mesh.vertices[f[2]]) < 1e-6);
    CHECK(spec.face_region[spec.model_point_face[dig.model_point_ids[i]]] >= 0);
  }
}

TEST_CASE("digitization noise has the configured spread") {
  const auto& spec = phantom();
  const FaceGrid grid(spec.mesh, 2.0);
  const RigidTransform to_model = spec.ground_truth_pose.inverse();
  std::vector<double> dist;
  for (std::uint64_t seed = 1; dist.size() < 10000; ++seed) {
    DigitizationSim d;
    d.noise_sigma = 0.5;
    d.seed = seed;
    for (const auto& p : simulate_digitization(spec, d).cloud.points) dist.push_back(grid.signed_distance(to_model.apply(p)));
  }
  double mean = 0.0;
  for (double x : dist) mean += x;
  mean /= static_cast<double>(dist.size());
  double ss = 0.0;
  for (double x : dist) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(dist.size() - 1));
  CHECK(std::abs(sd - 0.5) < 0.05);
  CHECK(std::abs(mean) < 0.05);
}

TEST_CASE("digitization point counts and determinism") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    DigitizationSim d;
    d.seed = seed;
    const auto a = simulate_digitization(phantom(), d);
    CHECK(a.cloud.size() >= 1268);
    CHECK(a.cloud.size() <= 2744);
    CHECK(a.simulated_time_s == doctest::Approx(static_cast<double>(a.cloud.size()) / d.sampling_rate_hz));
    const auto b = simulate_digitization(phantom(), d);
    CHECK(a.cloud.points == b.cloud.points);
  }
  DigitizationSim bad;
  bad.strokes = {"spinous", "sacrum"};
  CHECK(code_of([&] { simulate_digitization(phantom(), bad); }) == ErrorCode::UnknownRegion);
  bad = DigitizationSim{};
  bad.noise_sigma = -1.0;
  CHECK(code_of([&] { simulate_digitization(phantom(), bad); }) == ErrorCode::InvalidParams);
}

TEST_CASE("stereo frames behind a camera are skipped and counted") {
  const auto rig = default_rig();
  const auto geom = stereo::MarkerGeometry::square(50.0);
  const std::vector<TimedPose> path = {{0.0, RigidTransform::translation({0, 0, 500})},
                                       {0.1, RigidTransform::translation({0, 0, -200})},
                                       {0.2, RigidTransform::translation({0, 0, 450})}};
  const auto out = simulate_stereo_observations(rig, path, geom, 0.5, 3);
  CHECK(out.visible.size() == 2);
  REQUIRE(out.skipped_timestamps.size() == 1);
  CHECK(out.skipped_timestamps[0] == 0.1);
  CHECK(out.records.size() == 16);
}

TEST_CASE("axis fit on an exact line") {
  const Point3 p0(3, -4, 10);
  const Eigen::Vector3d d = Eigen::Vector3d(1, -2, 0.5).normalized();
  PointCloud pc;
  for (int i = 0; i < 30; ++i) pc.points.push_back(p0 + 1.5 * i * d);
  const Ray axis = fit_trajectory_axis(pc);
  CHECK((axis.direction.vec() - d).norm() < 1e-9);
  const Eigen::Vector3d off = axis.origin - p0;
  CHECK((off - off.dot(d) * d).norm() < 1e-9);

  std::reverse(pc.points.begin(), pc.points.end());
  CHECK((fit_trajectory_axis(pc).direction.vec() + d).norm() < 1e-9);
}

TEST_CASE("axis fit on cylinder samples") {
  std::mt19937_64 rng(40);
  double clean_sum = 0.0, noisy_sum = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const auto clean = cylinder_samples(rng, 80, 16, 1.0, 40.0, 0.0);
    const auto noisy = cylinder_samples(rng, 80, 16, 1.0, 40.0, 0.2);
    const Ray a = fit_trajectory_axis(clean);
    const Ray b = fit_trajectory_axis(noisy);
    const double ea = oracle::angle_deg_atan2(a.direction.vec(), Eigen::Vector3d::UnitZ());
    const double eb = oracle::angle_deg_atan2(b.direction.vec(), Eigen::Vector3d::UnitZ());
    CHECK(ea < 0.1);
    clean_sum += ea;
    noisy_sum += eb;
  }
  CHECK((noisy_sum - clean_sum) / trials < 0.5);
}

TEST_CASE("axis fit rejects clouds without a dominant axis") {
  std::mt19937_64 rng(41);
  PointCloud ball;
  for (int i = 0; i < 200; ++i) ball.points.push_back(oracle::random_vec(rng, -5, 5));
  CHECK(code_of([&] { fit_trajectory_axis(ball); }) == ErrorCode::DegenerateGeometry);
  PointCloud few;
  for (int i = 0; i < 9; ++i) few.points.emplace_back(0, 0, i);
  CHECK(code_of([&] { fit_trajectory_axis(few); }) == ErrorCode::DegenerateGeometry);
}

TEST_CASE("executing the plan exactly gives zero errors") {
  const auto& spec = phantom();
  std::vector<ExecutedTrajectory> exec;
  for (const auto& plan : spec.plans) exec.emplace_back(Ray{plan.entry_point, plan.trajectory});
  const auto report = evaluate_trial(spec.mesh, spec.plans, exec);
  for (const auto& s : report.screws) {
    CHECK(s.trajectory_error_deg == 0.0);
    REQUIRE(s.entry_error_mm.has_value());
    CHECK(*s.entry_error_mm < 1e-6);
  }
  CHECK(report.missed_entries == 0);
}

TEST_CASE("a 3.38 degree tilt about the entry point") {
  const auto& spec = phantom();
  sim::Rng rng(42);
  for (const auto& plan : spec.plans) {
    for (int k = 0; k < 10; ++k) {
      const UnitVector3 axis = random_perpendicular(rng, plan.trajectory);
      const auto tilt = RigidTransform::rotation_about(axis.vec(), deg_to_rad(3.38), plan.entry_point);
      const std::vector<ExecutedTrajectory> exec = {Ray{plan.entry_point, tilt.rotate(plan.trajectory)}};
      const auto report = evaluate_trial(spec.mesh, std::span(&plan, 1), exec);
      CHECK(std::abs(report.screws[0].trajectory_error_deg - 3.38) < 1e-9);
      REQUIRE(report.screws[0].entry_error_mm.has_value());
      CHECK(*report.screws[0].entry_error_mm < 1e-6);
    }
  }
}

TEST_CASE("evaluation matches per-screw analytic values on a box") {
  // Plans enter the top face (z = 20) straight down. The executed entry is
  // the line's crossing of that plane, computed here directly.
  const TriangleMesh mesh = box(20.0);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-8.0, 8.0), tilt(0.0, 25.0), slide(-30.0, 30.0);
  const ExecutionModel wire;
  std::vector<navigation::ScrewPlan> plans;
  std::vector<ExecutedTrajectory> exec;
  std::vector<double> want_angle, want_entry;
  for (int i = 0; i < 40; ++i) {
    const Point3 entry(u(rng), u(rng), 20.0);
    const UnitVector3 down(0, 0, -1);
    plans.push_back({entry, down, 30.0});
    const Eigen::Vector3d axis = Eigen::Vector3d(u(rng), u(rng), 0.0).normalized();
    const Eigen::Vector3d dir = Eigen::AngleAxisd(deg_to_rad(tilt(rng)), axis) * down.vec();
    const Point3 through = entry + Eigen::Vector3d(u(rng) / 8.0, u(rng) / 8.0, 0.0);
    const double s = (20.0 - through.z()) / dir.z();
    const Point3 hit = through + s * dir;
    want_angle.push_back(oracle::angle_deg_atan2(dir, down.vec()));
    want_entry.push_back((hit - entry).norm());
    if (i % 2) {
      exec.emplace_back(Ray{through + slide(rng) * dir, UnitVector3(dir)});
    } else {
      exec.emplace_back(wire_samples(through, UnitVector3(dir), 30.0, wire));
    }
  }
  const auto report = evaluate_trial(mesh, plans, exec);
  REQUIRE(report.screws.size() == plans.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    CHECK(std::abs(report.screws[i].trajectory_error_deg - want_angle[i]) < 1e-9);
    REQUIRE(report.screws[i].entry_error_mm.has_value());
    CHECK(std::abs(*report.screws[i].entry_error_mm - want_entry[i]) < 1e-9);
  }
}

TEST_CASE("a trajectory that misses the model is counted and excluded") {
  const TriangleMesh mesh = box(20.0);
  const std::vector<navigation::ScrewPlan> plans = {{{0, 0, 20}, UnitVector3(0, 0, -1), 30.0},
                                                    {{5, 5, 20}, UnitVector3(0, 0, -1), 30.0}};
  const std::vector<ExecutedTrajectory> exec = {Ray{{0, 0, 20}, UnitVector3(0, 0, -1)},
                                                Ray{{100, 0, 20}, UnitVector3(0, 0, -1)}};
  const auto report = evaluate_trial(mesh, plans, exec);
  CHECK(report.missed_entries == 1);
  CHECK_FALSE(report.screws[1].entry_error_mm.has_value());
  CHECK(report.entry_point_error_mm.count == 1);
  CHECK(report.trajectory_error_deg.count == 2);
  CHECK(code_of([&] { evaluate_trial(mesh, std::span(plans).first(1), exec); }) == ErrorCode::MismatchedLengths);
}

TEST_CASE("summary statistics") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(v);
  CHECK(s.count == 4);
  CHECK(s.mean == 2.5);
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(summarize(std::vector<double>{7.0}).sd == 0.0);
  CHECK(summarize(std::vector<double>{}).count == 0);
}

TEST_CASE("aggregates equal direct recomputation") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<TrialReport> parts(3);
  for (auto& part : parts) {
    for (int i = 0; i < 7; ++i) {
      ScrewOutcome s;
      s.trajectory_error_deg = u(rng);
      if (i != 3) s.entry_error_mm = u(rng);
      part.screws.push_back(s);
    }
    part.vertebrae.push_back({u(rng), static_cast<std::size_t>(1000 + 100 * u(rng)), 100 + u(rng)});
    part.recompute();
  }
  const auto all = TrialReport::combine(parts);
  std::vector<double> traj, entry;
  for (const auto& part : parts) {
    for (const auto& s : part.screws) {
      traj.push_back(s.trajectory_error_deg);
      if (s.entry_error_mm) entry.push_back(*s.entry_error_mm);
    }
  }
  auto check_stats = [](const Stats& got, const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    CHECK(got.count == v.size());
    CHECK(std::abs(got.mean - mean) < 1e-12);
    CHECK(std::abs(got.sd - std::sqrt(ss / static_cast<double>(v.size() - 1))) < 1e-12);
    CHECK(got.min == *std::min_element(v.begin(), v.end()));
    CHECK(got.max == *std::max_element(v.begin(), v.end()));
  };
  check_stats(all.trajectory_error_deg, traj);
  check_stats(all.entry_point_error_mm, entry);
  CHECK(all.missed_entries == 3);
  std::vector<double> rmse;
  for (const auto& part : parts) rmse.push_back(part.vertebrae[0].registration_rmse_mm);
  check_stats(all.registration_rmse_mm, rmse);
  const auto table = format_table(all);
  CHECK(table.find("Trajectory err.") != std::string::npos);
  CHECK(table.find("Reg. RMSE") != std::string::npos);
}

TEST_CASE("experiment config parsing") {
  ExperimentConfig cfg;
  cfg.seed = 99;
  cfg.vertebrae = 3;
  cfg.execution.angle_sigma_deg = 1.5;
  const auto back = experiment_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(code_of([] { experiment_from_json({{"seed", 1}}); }) == ErrorCode::ParseError);
  CHECK(code_of([] { experiment_from_json({{"schema_version", 2}}); }) == ErrorCode::InvalidParams);
  CHECK(code_of([] {
          experiment_from_json({{"schema_version", 1}, {"execution", {{"angle_sigma_deg", -1.0}}}});
        }) == ErrorCode::InvalidParams);
  CHECK(code_of([] { experiment_from_json({{"schema_version", 1}, {"vertebrae", "two"}}); }) ==
        ErrorCode::ParseError);
}

TEST_CASE("noiseless experiment is exact") {
  ExperimentConfig cfg;
  cfg.seed = 5;
  cfg.vertebrae = 2;
  cfg.digitization.noise_sigma = 0.0;
  const auto out = run_experiment(cfg);
  CHECK(out.report.registration_rmse_mm.max < 1e-3);
  CHECK(out.report.trajectory_error_deg.max < 1e-3);
  CHECK(out.report.entry_point_error_mm.max < 1e-3);
  CHECK(out.report.missed_entries == 0);
  for (const auto& v : out.vertebrae) {
    const RigidTransform err = v.registration.transform * v.phantom.ground_truth_pose;
    CHECK(err.rotation_angle_deg() < 1e-3);
    CHECK(err.translation().norm() < 1e-3);
  }
}

TEST_CASE("vertebra runs are reproducible") {
  ExperimentConfig cfg;
  cfg.seed = 8;
  cfg.execution.angle_sigma_deg = 2.0;
  cfg.execution.entry_jitter_mm = 1.0;
  const auto a = run_vertebra(cfg, 1);
  const auto b = run_vertebra(cfg, 1);
  CHECK(to_json(a.report).dump() == to_json(b.report).dump());
  CHECK(registration::to_json(a.registration).dump() == registration::to_json(b.registration).dump());
  CHECK(a.digitization.cloud.points == b.digitization.cloud.points);
  const auto other = run_vertebra(cfg, 0);
  CHECK(other.digitization.cloud.points != a.digitization.cloud.points);
}

TEST_CASE("smoke experiment reproduces the golden report") {
  const auto cfg = experiment_from_json(io::read_json(SPINENAV_SOURCE_DIR "/configs/smoke.json"));
  const auto golden = io::read_json(SPINENAV_FIXTURE_DIR "/smoke_report.json");
  const auto out = run_experiment(cfg);
  compare_json(to_json(out.report), golden, "report");
}

#include "spinenav/sim/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spinenav/core/geometry.hpp"
#include "spinenav/registration/registration.hpp"
#include "spinenav/sim/random.hpp"

namespace spinenav::sim {

namespace {

struct Lobe {
  Eigen::Vector3d center;  // unit
  double amplitude;
  double width;
};

double radius(const Eigen::Vector3d& dir, const Eigen::Vector3d& semi, const std::vector<Lobe>& lobes) {
  const double e = std::pow(dir.x() / semi.x(), 2) + std::pow(dir.y() / semi.y(), 2) +
                   std::pow(dir.z() / semi.z(), 2);
  double r = 1.0 / std::sqrt(e);
  for (const auto& lobe : lobes) {
    const double ang = std::acos(std::clamp(dir.dot(lobe.center), -1.0, 1.0));
    r += lobe.amplitude * std::exp(-ang * ang / (2.0 * lobe.width * lobe.width));
  }
  return r;
}

Eigen::Vector3d grid_direction(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::cos(theta), std::sin(theta) * std::sin(phi)};
}

}  // namespace

void PhantomParams::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidParams, what); };
  if (latitude_steps < 8 || longitude_steps < 8) bad("grid needs at least 8 steps per direction");
  if (!(body_semi_axes.minCoeff() > 0.0)) bad("body semi-axes must be > 0");
  if (transverse_amplitude < 0.0 || spinous_amplitude < 0.0 || articular_amplitude < 0.0 ||
      body_amplitude < 0.0) {
    bad("lobe amplitudes must be >= 0");
  }
  if (!(lobe_width > 0.0)) bad("lobe_width must be > 0");
  if (!(transverse_asymmetry >= 0.0 && transverse_asymmetry < 1.0)) bad("transverse_asymmetry in [0, 1)");
  if (!(shape_jitter >= 0.0 && shape_jitter < 0.5)) bad("shape_jitter in [0, 0.5)");
  if (model_cloud_points < 100) bad("model_cloud_points must be >= 100");
  if (!(reachable_normal_min > -1.0 && reachable_normal_min < 1.0)) bad("reachable_normal_min in (-1, 1)");
  if (!(screw_length > 0.0)) bad("screw_length must be > 0");
  if (pose_translation_range < 0.0 || pose_pa1_rotation_max_deg < 0.0 || pose_tilt_max_deg < 0.0) {
    bad("pose ranges must be >= 0");
  }
}

nlohmann::json to_json(const PhantomParams& p) {
  return {{"latitude_steps", p.latitude_steps},
          {"longitude_steps", p.longitude_steps},
          {"body_semi_axes_mm", {p.body_semi_axes.x(), p.body_semi_axes.y(), p.body_semi_axes.z()}},
          {"transverse_amplitude_mm", p.transverse_amplitude},
          {"transverse_asymmetry", p.transverse_asymmetry},
          {"spinous_amplitude_mm", p.spinous_amplitude},
          {"articular_amplitude_mm", p.articular_amplitude},
          {"body_amplitude_mm", p.body_amplitude},
          {"lobe_width_rad", p.lobe_width},
          {"shape_jitter", p.shape_jitter},
          {"model_cloud_points", p.model_cloud_points},
          {"reachable_normal_min", p.reachable_normal_min},
          {"screw_length_mm", p.screw_length},
          {"pose_translation_range_mm", p.pose_translation_range},
          {"pose_pa1_rotation_max_deg", p.pose_pa1_rotation_max_deg},
          {"pose_tilt_max_deg", p.pose_tilt_max_deg}};
}

PhantomParams phantom_params_from_json(const nlohmann::json& j) {
  PhantomParams p;
  try {
    p.latitude_steps = j.value("latitude_steps", p.latitude_steps);
    p.longitude_steps = j.value("longitude_steps", p.longitude_steps);
    if (j.contains("body_semi_axes_mm")) {
      const auto& a = j.at("body_semi_axes_mm");
      p.body_semi_axes = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
    }
    p.transverse_amplitude = j.value("transverse_amplitude_mm", p.transverse_amplitude);
    p.transverse_asymmetry = j.value("transverse_asymmetry", p.transverse_asymmetry);
    p.spinous_amplitude = j.value("spinous_amplitude_mm", p.spinous_amplitude);
    p.articular_amplitude = j.value("articular_amplitude_mm", p.articular_amplitude);
    p.body_amplitude = j.value("body_amplitude_mm", p.body_amplitude);
    p.lobe_width = j.value("lobe_width_rad", p.lobe_width);
    p.shape_jitter = j.value("shape_jitter", p.shape_jitter);
    p.model_cloud_points = j.value("model_cloud_points", p.model_cloud_points);
    p.reachable_normal_min = j.value("reachable_normal_min", p.reachable_normal_min);
    p.screw_length = j.value("screw_length_mm", p.screw_length);
    p.pose_translation_range = j.value("pose_translation_range_mm", p.pose_translation_range);
    p.pose_pa1_rotation_max_deg = j.value("pose_pa1_rotation_max_deg", p.pose_pa1_rotation_max_deg);
    p.pose_tilt_max_deg = j.value("pose_tilt_max_deg", p.pose_tilt_max_deg);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("phantom params: ") + e.what());
  }
  p.validate();
  return p;
}

PointCloud PhantomSpec::model_cloud() const {
  return model_points;
}

int PhantomSpec::region_index(const std::string& name) const {
  for (std::size_t i = 0; i < region_names.size(); ++i) {
    if (region_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

double PhantomSpec::reachable_area() const {
  double a = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (face_region[f] >= 0) a += mesh.face_area(f);
  }
  return a;
}

std::uint32_t PhantomSpec::grid_vertex(int row, int col) const {
  const int lon = longitude_steps;
  col = ((col % lon) + lon) % lon;
  return static_cast<std::uint32_t>(1 + (row - 1) * lon + col);
}

PhantomSpec generate_phantom(std::uint64_t seed, const PhantomParams& params) {
  params.validate();
  Rng rng(derive_seed(seed, 0));
  const double j = params.shape_jitter;
  auto jitter = [&](double v) { return v * (1.0 + uniform(rng, -j, j)); };

  const Eigen::Vector3d semi(jitter(params.body_semi_axes.x()), jitter(params.body_semi_axes.y()),
                             jitter(params.body_semi_axes.z()));
  const double transverse = jitter(params.transverse_amplitude);
  const double asym = params.transverse_asymmetry;
  const double w = params.lobe_width;
  const std::vector<Lobe> lobes = {
      {Eigen::Vector3d(1.0, 0.0, 0.25).normalized(), transverse * (1.0 + 0.5 * asym), w},
      {Eigen::Vector3d(-1.0, 0.0, 0.25).normalized(), transverse * (1.0 - 0.5 * asym), w},
      {Eigen::Vector3d(0.0, -0.75, 0.66).normalized(), jitter(params.spinous_amplitude), 0.85 * w},
      {Eigen::Vector3d(0.45, 0.6, 0.66).normalized(), jitter(params.articular_amplitude), 0.7 * w},
      {Eigen::Vector3d(-0.45, 0.6, 0.66).normalized(), jitter(params.articular_amplitude), 0.7 * w},
      {Eigen::Vector3d(0.0, 0.0, -1.0), jitter(params.body_amplitude), 2.0 * w},
  };

  PhantomSpec spec;
  const int lat = params.latitude_steps;
  const int lon = params.longitude_steps;
  spec.latitude_steps = lat;
  spec.longitude_steps = lon;
  auto& mesh = spec.mesh;

  const double pi = std::numbers::pi;
  auto vertex_at = [&](double theta, double phi) {
    const Eigen::Vector3d d = grid_direction(theta, phi);
    return Point3(radius(d, semi, lobes) * d);
  };
  mesh.vertices.push_back(vertex_at(0.0, 0.0));
  for (int i = 1; i < lat; ++i) {
    const double theta = pi * i / lat;
    for (int c = 0; c < lon; ++c) mesh.vertices.push_back(vertex_at(theta, 2.0 * pi * c / lon));
  }
  mesh.vertices.push_back(vertex_at(pi, 0.0));
  const auto south = static_cast<std::uint32_t>(mesh.vertices.size() - 1);

  for (int c = 0; c < lon; ++c) {
    mesh.faces.push_back({0u, spec.grid_vertex(1, c + 1), spec.grid_vertex(1, c)});
  }
  for (int i = 1; i + 1 < lat; ++i) {
    for (int c = 0; c < lon; ++c) {
      const auto a = spec.grid_vertex(i, c), b = spec.grid_vertex(i, c + 1);
      const auto d = spec.grid_vertex(i + 1, c), e = spec.grid_vertex(i + 1, c + 1);
      mesh.faces.push_back({a, b, e});
      mesh.faces.push_back({a, e, d});
    }
  }
  for (int c = 0; c < lon; ++c) {
    mesh.faces.push_back({south, spec.grid_vertex(lat - 1, c), spec.grid_vertex(lat - 1, c + 1)});
  }

  // Orient outward.
  double volume = 0.0;
  for (const auto& f : mesh.faces) {
    volume += mesh.vertices[f[0]].dot(mesh.vertices[f[1]].cross(mesh.vertices[f[2]]));
  }
  if (volume < 0.0) {
    for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  }
  mesh.validate();

  // Area-weighted vertex normals.
  std::vector<Eigen::Vector3d> acc(mesh.vertices.size(), Eigen::Vector3d::Zero());
  for (const auto& f : mesh.faces) {
    const Eigen::Vector3d n =
        (mesh.vertices[f[1]] - mesh.vertices[f[0]]).cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
    for (auto v : f) acc[v] += n;
  }
  spec.vertex_normals.reserve(acc.size());
  for (const auto& n : acc) spec.vertex_normals.emplace_back(n);

  // Reachable (posterior, upward-facing) faces split into named strips along x.
  spec.region_names = {"left_transverse", "left_lamina", "spinous", "right_lamina",
                       "right_transverse"};
  const double lamina_edge = 0.8 * semi.x();
  const double spinous_edge = 5.0;
  spec.face_region.assign(mesh.faces.size(), -1);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& [a, b, c] = mesh.faces[f];
    const Point3 centre = (mesh.vertices[a] + mesh.vertices[b] + mesh.vertices[c]) / 3.0;
    if (centre.z() <= 0.0 || mesh.face_normal(f).z() <= params.reachable_normal_min) continue;
    const double x = centre.x();
    int region = 2;
    if (x < -lamina_edge) region = 0;
    else if (x < -spinous_edge) region = 1;
    else if (x > lamina_edge) region = 4;
    else if (x > spinous_edge) region = 3;
    spec.face_region[f] = region;
  }
  spec.vertex_region.assign(mesh.vertices.size(), -2);  // -2: no face seen yet
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (auto v : mesh.faces[f]) {
      auto& r = spec.vertex_region[v];
      if (spec.face_region[f] < 0) r = -1;
      else if (r == -2) r = spec.face_region[f];
    }
  }
  for (auto& r : spec.vertex_region) r = std::max(r, -1);

  // Area-uniform surface samples. An irregular target avoids the lattice-shift
  // fixed points that nearest-vertex matching has on a regular grid.
  {
    Rng sample_rng(derive_seed(seed, 2));
    std::vector<double> cumulative(mesh.faces.size());
    double total = 0.0;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) cumulative[f] = total += mesh.face_area(f);
    spec.model_points.points.reserve(static_cast<std::size_t>(params.model_cloud_points));
    for (int k = 0; k < params.model_cloud_points; ++k) {
      const double pick = uniform(sample_rng, 0.0, total);
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
      const auto f = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
      const double r1 = std::sqrt(uniform(sample_rng, 0.0, 1.0));
      const double r2 = uniform(sample_rng, 0.0, 1.0);
      const auto& [a, b, c] = mesh.faces[f];
      spec.model_points.points.push_back((1.0 - r1) * mesh.vertices[a] + r1 * (1.0 - r2) * mesh.vertices[b] +
                                         r1 * r2 * mesh.vertices[c]);
      spec.model_points.normals.emplace_back(mesh.face_normal(f));
      spec.model_point_face.push_back(static_cast<std::uint32_t>(f));
    }
  }

  // Pedicle-style plans: enter posteriorly, converge medially.
  for (double side : {-1.0, 1.0}) {
    const UnitVector3 dir(Eigen::Vector3d(-side * 0.25, 0.0, -1.0));
    const Point3 aim(side * 0.45 * semi.x(), 0.0, 0.0);
    const Ray ray{aim - 300.0 * dir.vec(), dir};
    const auto entry = ray_mesh_first_intersection(ray, mesh);
    if (!entry) throw Error(ErrorCode::InvalidParams, "planned trajectory misses the phantom");
    spec.plans.push_back({*entry, dir, params.screw_length});
  }

  // Ground truth: spin about the model's major axis, tilt, translate.
  Rng pose_rng(derive_seed(seed, 1));
  const auto axes = registration::pca_axes(spec.model_points.points);
  const double spin = deg_to_rad(uniform(pose_rng, -params.pose_pa1_rotation_max_deg,
                                         params.pose_pa1_rotation_max_deg));
  const double tilt = deg_to_rad(uniform(pose_rng, 0.0, params.pose_tilt_max_deg));
  const UnitVector3 tilt_axis = random_perpendicular(pose_rng, axes.pa1());
  const double tr = params.pose_translation_range;
  const Point3 shift(uniform(pose_rng, -tr, tr), uniform(pose_rng, -tr, tr), uniform(pose_rng, -tr, tr));
  spec.ground_truth_pose = RigidTransform::translation(shift) *
                           RigidTransform::rotation_about(tilt_axis.vec(), tilt) *
                           RigidTransform::rotation_about(axes.pa1().vec(), spin);
  return spec;
}

}  // namespace spinenav::sim

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinenav/core/types.hpp"
#include "spinenav/navigation/navigation.hpp"

namespace spinenav::sim {

/// Shape parameters of the synthetic vertebra. The surface is star-shaped
/// around the origin: an ellipsoidal body (long axis x) plus smooth radial
/// lobes for the transverse, spinous and articular processes. Posterior is
/// +z, which is also where the surgeon approaches from.
struct PhantomParams {
  int latitude_steps = 120;   // rings between the poles (polar axis = y)
  int longitude_steps = 240;
  Eigen::Vector3d body_semi_axes{20.0, 12.0, 10.0};  // mm
  double transverse_amplitude = 17.0;  // mm, lobes at +-x
  double transverse_asymmetry = 0.06;  // relative right/left difference
  double spinous_amplitude = 22.0;     // mm, posterior-caudal lobe
  double articular_amplitude = 6.0;    // mm, posterior-cranial lobes
  double body_amplitude = 5.0;         // mm, anterior bulge
  double lobe_width = 0.35;            // rad
  double shape_jitter = 0.08;          // relative per-seed variation
  int model_cloud_points = 60000;      // area-uniform samples forming the model cloud
  double reachable_normal_min = 0.3;   // face normal . (+z) for reachable faces
  double screw_length = 40.0;          // mm
  double pose_translation_range = 100.0;  // mm, ground-truth pose
  double pose_pa1_rotation_max_deg = 180.0;
  double pose_tilt_max_deg = 30.0;

  void validate() const;
};

nlohmann::json to_json(const PhantomParams& p);
/// Missing keys keep their defaults. Throws InvalidParams / ParseError.
PhantomParams phantom_params_from_json(const nlohmann::json& j);

struct PhantomSpec {
  TriangleMesh mesh;  // preoperative model frame
  std::vector<UnitVector3> vertex_normals;
  std::vector<std::string> region_names;
  std::vector<int> face_region;    // index into region_names, -1 = not reachable
  std::vector<int> vertex_region;  // -1 unless every adjacent face is reachable
  PointCloud model_points;         // surface samples with face normals
  std::vector<std::uint32_t> model_point_face;
  int latitude_steps = 0;
  int longitude_steps = 0;
  RigidTransform ground_truth_pose;  // model frame -> patient frame
  std::vector<navigation::ScrewPlan> plans;
  UnitVector3 approach = UnitVector3(0.0, 0.0, -1.0);

  /// Surface samples with face normals, the registration target.
  PointCloud model_cloud() const;
  int region_index(const std::string& name) const;  // -1 when unknown
  double reachable_area() const;
  /// Grid vertex (row in 1..latitude_steps-1, column mod longitude_steps).
  std::uint32_t grid_vertex(int row, int col) const;
};

/// Deterministic for a given seed. Throws InvalidParams.
PhantomSpec generate_phantom(std::uint64_t seed, const PhantomParams& params = {});

}  // namespace spinenav::sim

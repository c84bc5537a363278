#pragma once

#include <array>

#include "json.hpp"
#include "spinenav/stereo/camera.hpp"

namespace spinenav::stereo {

struct Triangulation {
  Point3 midpoint;
  double gap;  // length of the common perpendicular, mm
};

/// Midpoint of the shortest segment between the two (infinite) ray lines.
/// Throws ParallelRays when |d_left x d_right| < 1e-12.
Triangulation triangulate_closest_point(const Ray& left, const Ray& right);

/// Square fiducial, corners counter-clockwise from top-left in the marker
/// frame (centre at the origin, plane z = 0).
struct MarkerGeometry {
  double side_length = 0.0;
  std::array<Point3, 4> corners;

  static MarkerGeometry square(double side_length_mm);
  /// Coplanar (z = 0), square and centred, within 1e-6 mm.
  void validate() const;
};

/// Filtered pixel positions of the four corners in both images, same
/// ordering as MarkerGeometry::corners.
struct StereoCorners {
  std::array<Pixel, 4> left;
  std::array<Pixel, 4> right;
};

struct MarkerPose {
  RigidTransform pose;  // marker frame -> rig frame
  double reprojection_rmse = 0.0;  // px, over all 8 corner projections
  std::array<double, 4> triangulation_gaps{};
};

struct PoseOptions {
  /// Frames whose fitted pose reprojects worse than this are rejected
  /// (typically a corner-order mix-up).
  double max_reprojection_rmse_px = 5.0;
};

/// Triangulates each corner from the two viewing rays and fits the marker
/// model to the triangulated points with absolute orientation.
///
/// Throws ParallelRays, DegenerateGeometry, or ReprojectionRejected.
MarkerPose estimate_marker_pose(const StereoRig& rig, const StereoCorners& corners,
                                const MarkerGeometry& geom, const PoseOptions& options = {});

/// Rigid tool carrying a marker. The axis (marker frame) is the tool's
/// pointing direction, used as the navigated "current trajectory".
struct ToolGeometry {
  Point3 tip_offset = Point3::Zero();
  UnitVector3 axis = UnitVector3(0.0, 0.0, 1.0);
};

Point3 tool_tip_position(const MarkerPose& pose, const ToolGeometry& tool);
UnitVector3 tool_axis(const MarkerPose& pose, const ToolGeometry& tool);

nlohmann::json to_json(const MarkerGeometry& geom);
MarkerGeometry marker_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MarkerPose& pose);

}  // namespace spinenav::stereo

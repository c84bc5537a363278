#pragma once

#include <optional>

#include "json.hpp"
#include "spinenav/core/types.hpp"

namespace spinenav::stereo {

using Pixel = Eigen::Vector2d;

/// Pre-rectified pinhole camera. The view space looks down +z; `cam_to_rig`
/// maps view-space coordinates into the shared rig frame.
struct CameraModel {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  RigidTransform cam_to_rig;

  void validate() const;
  Point3 center() const { return cam_to_rig.translation(); }
  bool in_image(const Pixel& px) const;
  /// Projects a rig-frame point; nullopt when it is not in front of the camera.
  std::optional<Pixel> project(const Point3& rig_point) const;
};

struct StereoRig {
  CameraModel left;
  CameraModel right;

  /// Both cameras valid and a non-zero baseline.
  void validate() const;
};

/// ((u - cx) / fx, (v - cy) / fy, 1) in view space.
Point3 unproject_to_unit_plane(const CameraModel& cam, const Pixel& px);

/// Rig-frame ray from the camera centre through the pixel.
Ray viewing_ray(const CameraModel& cam, const Pixel& px);

nlohmann::json to_json(const CameraModel& cam);
CameraModel camera_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StereoRig& rig);
StereoRig rig_from_json(const nlohmann::json& j);

}  // namespace spinenav::stereo

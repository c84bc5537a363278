#include "spinenav/stereo/camera.hpp"

#include <cmath>

#include "spinenav/core/io.hpp"

namespace spinenav::stereo {

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::InvalidArgument, "focal lengths must be > 0");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "image size must be > 0");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
  }
}

bool CameraModel::in_image(const Pixel& px) const {
  return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 && px.y() < height;
}

std::optional<Pixel> CameraModel::project(const Point3& rig_point) const {
  const Point3 p = cam_to_rig.inverse().apply(rig_point);
  if (!(p.z() > 0.0)) return std::nullopt;
  return Pixel(fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy);
}

void StereoRig::validate() const {
  left.validate();
  right.validate();
  if ((left.center() - right.center()).norm() < 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "stereo rig has zero baseline");
  }
}

Point3 unproject_to_unit_plane(const CameraModel& cam, const Pixel& px) {
  return {(px.x() - cam.cx) / cam.fx, (px.y() - cam.cy) / cam.fy, 1.0};
}

Ray viewing_ray(const CameraModel& cam, const Pixel& px) {
  const Point3 on_plane = unproject_to_unit_plane(cam, px);
  return {cam.center(), UnitVector3(cam.cam_to_rig.rotate(Eigen::Vector3d(on_plane)))};
}

nlohmann::json to_json(const CameraModel& cam) {
  return {{"fx", cam.fx},         {"fy", cam.fy},         {"cx", cam.cx},
          {"cy", cam.cy},         {"width", cam.width},   {"height", cam.height},
          {"cam_to_rig", io::to_json(cam.cam_to_rig)}};
}

CameraModel camera_from_json(const nlohmann::json& j) {
  CameraModel cam;
  try {
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.cam_to_rig = io::transform_from_json(j.at("cam_to_rig"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("camera: ") + e.what());
  }
  cam.validate();
  return cam;
}

nlohmann::json to_json(const StereoRig& rig) {
  return {{"left", to_json(rig.left)}, {"right", to_json(rig.right)}};
}

StereoRig rig_from_json(const nlohmann::json& j) {
  if (!j.contains("left") || !j.contains("right")) {
    throw Error(ErrorCode::ParseError, "rig needs 'left' and 'right' cameras");
  }
  StereoRig rig{camera_from_json(j.at("left")), camera_from_json(j.at("right"))};
  rig.validate();
  return rig;
}

}  // namespace spinenav::stereo

#include "spinenav/sim/stereo_sim.hpp"

#include "spinenav/sim/random.hpp"

namespace spinenav::sim {

stereo::StereoRig default_rig(double baseline_mm, int width, int height, double focal_px) {
  stereo::CameraModel cam;
  cam.fx = cam.fy = focal_px;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.width = width;
  cam.height = height;
  stereo::StereoRig rig{cam, cam};
  rig.left.cam_to_rig = RigidTransform::translation(Point3(-0.5 * baseline_mm, 0.0, 0.0));
  rig.right.cam_to_rig = RigidTransform::translation(Point3(0.5 * baseline_mm, 0.0, 0.0));
  rig.validate();
  return rig;
}

std::optional<stereo::StereoCorners> project_marker(const stereo::StereoRig& rig,
                                                    const stereo::MarkerGeometry& geom,
                                                    const RigidTransform& pose) {
  stereo::StereoCorners out;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point3 p = pose.apply(geom.corners[i]);
    const auto l = rig.left.project(p);
    const auto r = rig.right.project(p);
    if (!l || !r || !rig.left.in_image(*l) || !rig.right.in_image(*r)) return std::nullopt;
    out.left[i] = *l;
    out.right[i] = *r;
  }
  return out;
}

StereoSimResult simulate_stereo_observations(const stereo::StereoRig& rig,
                                             const std::vector<TimedPose>& trajectory,
                                             const stereo::MarkerGeometry& geom,
                                             double pixel_noise_sigma, std::uint64_t seed) {
  Rng rng(seed);
  StereoSimResult out;
  for (const auto& frame : trajectory) {
    const auto corners = project_marker(rig, geom, frame.pose);
    if (!corners) {
      out.skipped_timestamps.push_back(frame.timestamp);
      continue;
    }
    out.visible.push_back(frame);
    for (int cam = 0; cam < 2; ++cam) {
      const auto& px = cam == 0 ? corners->left : corners->right;
      for (std::size_t i = 0; i < 4; ++i) {
        stereo::StreamRecord r;
        r.timestamp = frame.timestamp;
        r.camera = cam == 0 ? stereo::Camera::Left : stereo::Camera::Right;
        r.corner_id = static_cast<int>(i) + 1;
        const double du = gaussian(rng, pixel_noise_sigma);
        const double dv = gaussian(rng, pixel_noise_sigma);
        r.pixel = px[i] + stereo::Pixel(du, dv);
        out.records.push_back(r);
      }
    }
  }
  return out;
}

}  // namespace spinenav::sim

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spinenav/stereo/pose.hpp"
#include "spinenav/stereo/tracker.hpp"

namespace spinenav::sim {

struct TimedPose {
  double timestamp;
  RigidTransform pose;  // marker frame -> rig frame
};

struct StereoSimResult {
  std::vector<stereo::StreamRecord> records;
  std::vector<TimedPose> visible;       // frames that produced observations
  std::vector<double> skipped_timestamps;  // frames culled for visibility
};

/// Parallel cameras at x = -+baseline/2 looking down +z.
stereo::StereoRig default_rig(double baseline_mm = 100.0, int width = 640, int height = 480,
                              double focal_px = 450.0);

/// Noiseless pinhole projection of the marker corners, or nullopt when any
/// corner is behind a camera or outside an image.
std::optional<stereo::StereoCorners> project_marker(const stereo::StereoRig& rig,
                                                    const stereo::MarkerGeometry& geom,
                                                    const RigidTransform& pose);

/// Projects every pose into both cameras with seeded Gaussian pixel noise.
/// Frames with any corner not visible in both images are skipped.
StereoSimResult simulate_stereo_observations(const stereo::StereoRig& rig,
                                             const std::vector<TimedPose>& trajectory,
                                             const stereo::MarkerGeometry& geom,
                                             double pixel_noise_sigma, std::uint64_t seed);

}  // namespace spinenav::sim

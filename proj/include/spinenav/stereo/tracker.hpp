#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spinenav/stereo/kalman.hpp"
#include "spinenav/stereo/pose.hpp"

namespace spinenav::stereo {

enum class Camera { Left, Right };

/// One row of an observation stream CSV:
/// timestamp_s,camera,corner_id,u_px,v_px
struct StreamRecord {
  double timestamp = 0.0;
  Camera camera = Camera::Left;
  int corner_id = 1;
  Pixel pixel = Pixel::Zero();
};

std::vector<StreamRecord> read_observation_csv(std::istream& is);
void write_observation_csv(std::ostream& os, const std::vector<StreamRecord>& records);

enum class FrameStatus { Ok, Incomplete, Rejected };

struct FrameResult {
  double timestamp = 0.0;
  FrameStatus status = FrameStatus::Incomplete;
  MarkerPose pose;     // valid when status == Ok
  std::string reason;  // set otherwise
};

nlohmann::json to_json(const FrameResult& frame);

/// Runs one Kalman filter per (camera, corner) stream and estimates a pose
/// for every timestamp where all eight corners were observed. Records are
/// grouped into frames by identical timestamp.
class MarkerTracker {
 public:
  MarkerTracker(StereoRig rig, MarkerGeometry geom, KalmanNoise noise = {},
                PoseOptions options = {});

  std::vector<FrameResult> process(const std::vector<StreamRecord>& records);

 private:
  FrameResult finish_frame(double timestamp, const std::array<bool, 8>& seen);

  StereoRig rig_;
  MarkerGeometry geom_;
  KalmanNoise noise_;
  PoseOptions options_;
  std::array<CornerFilterState, 8> filters_{};  // [camera * 4 + corner - 1]
};

}  // namespace spinenav::stereo

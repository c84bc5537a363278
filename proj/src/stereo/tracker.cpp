#include "spinenav/stereo/tracker.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "spinenav/core/io.hpp"

namespace spinenav::stereo {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ls(line);
  while (std::getline(ls, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace

std::vector<StreamRecord> read_observation_csv(std::istream& is) {
  std::vector<StreamRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("timestamp", 0) == 0) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 5) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 5 columns");
    }
    StreamRecord r;
    r.timestamp = parse_double(cells[0], line_no);
    if (cells[1] == "L") {
      r.camera = Camera::Left;
    } else if (cells[1] == "R") {
      r.camera = Camera::Right;
    } else {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": camera must be L or R");
    }
    const double id = parse_double(cells[2], line_no);
    if (id != 1.0 && id != 2.0 && id != 3.0 && id != 4.0) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": corner_id must be 1..4");
    }
    r.corner_id = static_cast<int>(id);
    r.pixel = Pixel(parse_double(cells[3], line_no), parse_double(cells[4], line_no));
    out.push_back(r);
  }
  return out;
}

void write_observation_csv(std::ostream& os, const std::vector<StreamRecord>& records) {
  os << "timestamp_s,camera,corner_id,u_px,v_px\n" << std::setprecision(17);
  for (const auto& r : records) {
    os << r.timestamp << ',' << (r.camera == Camera::Left ? 'L' : 'R') << ',' << r.corner_id
       << ',' << r.pixel.x() << ',' << r.pixel.y() << '\n';
  }
}

nlohmann::json to_json(const FrameResult& frame) {
  nlohmann::json j = {{"timestamp_s", frame.timestamp}};
  switch (frame.status) {
    case FrameStatus::Ok:
      j["status"] = "ok";
      j.update(to_json(frame.pose));
      break;
    case FrameStatus::Incomplete:
      j["status"] = "incomplete";
      j["reason"] = frame.reason;
      break;
    case FrameStatus::Rejected:
      j["status"] = "rejected";
      j["reason"] = frame.reason;
      break;
  }
  return j;
}

MarkerTracker::MarkerTracker(StereoRig rig, MarkerGeometry geom, KalmanNoise noise,
                             PoseOptions options)
    : rig_(std::move(rig)), geom_(geom), noise_(noise), options_(options) {
  rig_.validate();
  geom_.validate();
}

FrameResult MarkerTracker::finish_frame(double timestamp, const std::array<bool, 8>& seen) {
  FrameResult frame;
  frame.timestamp = timestamp;
  for (std::size_t i = 0; i < 8; ++i) {
    if (!seen[i]) {
      frame.status = FrameStatus::Incomplete;
      frame.reason = "corner " + std::to_string(i % 4 + 1) + " missing in " +
                     (i < 4 ? "left" : "right") + " image";
      return frame;
    }
  }
  StereoCorners corners;
  for (std::size_t i = 0; i < 4; ++i) {
    corners.left[i] = filters_[i].position();
    corners.right[i] = filters_[4 + i].position();
  }
  try {
    frame.pose = estimate_marker_pose(rig_, corners, geom_, options_);
    frame.status = FrameStatus::Ok;
  } catch (const Error& e) {
    frame.status = FrameStatus::Rejected;
    frame.reason = e.what();
  }
  return frame;
}

std::vector<FrameResult> MarkerTracker::process(const std::vector<StreamRecord>& records) {
  std::vector<FrameResult> frames;
  std::array<bool, 8> seen{};
  bool open = false;
  double current = 0.0;
  for (const auto& r : records) {
    if (open && r.timestamp != current) {
      frames.push_back(finish_frame(current, seen));
      seen = {};
    }
    open = true;
    current = r.timestamp;
    const std::size_t slot = (r.camera == Camera::Left ? 0 : 4) + static_cast<std::size_t>(r.corner_id - 1);
    filters_[slot] = kalman_update(filters_[slot], {r.corner_id, r.pixel, r.timestamp}, noise_);
    seen[slot] = true;
  }
  if (open) frames.push_back(finish_frame(current, seen));
  return frames;
}

}  // namespace spinenav::stereo

#include "spinenav/navigation/rod.hpp"

#include <algorithm>
#include <cmath>

#include "spinenav/core/io.hpp"

namespace spinenav::navigation {

namespace {

constexpr double kCoincident = 1e-9;
constexpr int kMinDepth = 4;
constexpr int kMaxDepth = 40;

}  // namespace

CentripetalSpline::CentripetalSpline(std::span<const Point3> control_points)
    : controls_(control_points.begin(), control_points.end()) {
  if (controls_.size() < 2) throw Error(ErrorCode::InvalidArgument, "spline needs >= 2 control points");
  for (std::size_t i = 1; i < controls_.size(); ++i) {
    if ((controls_[i] - controls_[i - 1]).norm() <= kCoincident) {
      throw Error(ErrorCode::CoincidentControlPoints, "consecutive control points coincide", i);
    }
  }
  const auto n = controls_.size();
  extended_.reserve(n + 2);
  extended_.push_back(2.0 * controls_[0] - controls_[1]);
  extended_.insert(extended_.end(), controls_.begin(), controls_.end());
  extended_.push_back(2.0 * controls_[n - 1] - controls_[n - 2]);

  ext_knots_.resize(extended_.size());
  ext_knots_[0] = 0.0;
  for (std::size_t j = 1; j < extended_.size(); ++j) {
    ext_knots_[j] = ext_knots_[j - 1] + std::sqrt((extended_[j] - extended_[j - 1]).norm());
  }
}

std::vector<double> CentripetalSpline::knots() const {
  std::vector<double> k;
  k.reserve(controls_.size());
  for (std::size_t i = 1; i + 1 < ext_knots_.size(); ++i) k.push_back(ext_knots_[i] - ext_knots_[1]);
  return k;
}

Point3 CentripetalSpline::evaluate_segment(std::size_t segment, double u) const {
  // Cubic Hermite form of the non-uniform Catmull-Rom segment.
  const Point3& p0 = extended_[segment];
  const Point3& p1 = extended_[segment + 1];
  const Point3& p2 = extended_[segment + 2];
  const Point3& p3 = extended_[segment + 3];
  const double t0 = ext_knots_[segment], t1 = ext_knots_[segment + 1];
  const double t2 = ext_knots_[segment + 2], t3 = ext_knots_[segment + 3];
  const double span = t2 - t1;

  const Eigen::Vector3d m1 =
      span * ((p1 - p0) / (t1 - t0) - (p2 - p0) / (t2 - t0) + (p2 - p1) / span);
  const Eigen::Vector3d m2 =
      span * ((p2 - p1) / span - (p3 - p1) / (t3 - t1) + (p3 - p2) / (t3 - t2));

  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
  const double h10 = u3 - 2.0 * u2 + u;
  const double h01 = -2.0 * u3 + 3.0 * u2;
  const double h11 = u3 - u2;
  return h00 * p1 + h10 * m1 + h01 * p2 + h11 * m2;
}

Point3 CentripetalSpline::evaluate(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  const double begin = ext_knots_[1];
  const double end = ext_knots_[ext_knots_.size() - 2];
  const double tau = begin + t * (end - begin);
  // Segment i covers [ext_knots_[i + 1], ext_knots_[i + 2]].
  std::size_t seg = 0;
  while (seg + 1 < segment_count() && tau >= ext_knots_[seg + 2]) ++seg;
  const double a = ext_knots_[seg + 1], b = ext_knots_[seg + 2];
  if (tau == a) return controls_[seg];
  if (tau == b) return controls_[seg + 1];
  return evaluate_segment(seg, (tau - a) / (b - a));
}

Point3 catmull_rom_centripetal(std::span<const Point3> control_points, double t) {
  return CentripetalSpline(control_points).evaluate(t);
}

namespace {

double adaptive_length(const CentripetalSpline& spline, std::size_t seg, double ua, double ub,
                       const Point3& pa, const Point3& pb, double tol, int depth) {
  const double um = 0.5 * (ua + ub);
  const Point3 pm = spline.evaluate_segment(seg, um);
  const double chord = (pb - pa).norm();
  const double refined = (pm - pa).norm() + (pb - pm).norm();
  if ((depth >= kMinDepth && refined - chord < tol) || depth >= kMaxDepth) return refined;
  return adaptive_length(spline, seg, ua, um, pa, pm, 0.5 * tol, depth + 1) +
         adaptive_length(spline, seg, um, ub, pm, pb, 0.5 * tol, depth + 1);
}

}  // namespace

double rod_length(const RodTemplate& rod, double tolerance) {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "length tolerance must be > 0");
  const CentripetalSpline spline(rod.control_points);
  const double per_segment = tolerance / static_cast<double>(spline.segment_count());
  double total = 0.0;
  for (std::size_t s = 0; s < spline.segment_count(); ++s) {
    total += adaptive_length(spline, s, 0.0, 1.0, rod.control_points[s],
                             rod.control_points[s + 1], per_segment, 0);
  }
  return total;
}

RodTemplate make_rod_template(std::span<const Point3> screw_heads, double tolerance) {
  const CentripetalSpline spline(screw_heads);
  RodTemplate rod;
  rod.control_points = spline.control_points();
  rod.knots = spline.knots();
  rod.estimated_length = rod_length(rod, tolerance);
  return rod;
}

std::vector<Point3> sample_rod(const RodTemplate& rod, std::size_t count) {
  const CentripetalSpline spline(rod.control_points);
  std::vector<Point3> out;
  if (count == 0) return out;
  if (count == 1) return {spline.evaluate(0.0)};
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(spline.evaluate(static_cast<double>(i) / static_cast<double>(count - 1)));
  }
  return out;
}

std::vector<Point3> screw_head_capture(std::span<const Point3> tip_positions,
                                       double min_separation) {
  for (std::size_t i = 1; i < tip_positions.size(); ++i) {
    if ((tip_positions[i] - tip_positions[i - 1]).norm() < min_separation) {
      throw Error(ErrorCode::PointsTooClose,
                  "capture " + std::to_string(i) + " is closer than " +
                      std::to_string(min_separation) + " mm to its predecessor",
                  i);
    }
  }
  return {tip_positions.begin(), tip_positions.end()};
}

nlohmann::json to_json(const RodTemplate& rod, std::size_t sample_count) {
  nlohmann::json controls = nlohmann::json::array();
  for (const auto& p : rod.control_points) controls.push_back(io::to_json(p));
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& p : sample_rod(rod, sample_count)) samples.push_back(io::to_json(p));
  return {{"control_points_mm", controls},
          {"knots", rod.knots},
          {"estimated_length_mm", rod.estimated_length},
          {"samples_mm", samples}};
}

}  // namespace spinenav::navigation

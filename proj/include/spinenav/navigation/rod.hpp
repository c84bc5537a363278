#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "spinenav/core/types.hpp"

namespace spinenav::navigation {

/// Piecewise cubic Catmull-Rom curve with centripetal (alpha = 0.5) knot
/// spacing through all control points. The end segments use phantom points
/// reflected through the first and last control point.
class CentripetalSpline {
 public:
  /// Throws InvalidArgument for fewer than 2 points and
  /// CoincidentControlPoints when consecutive points are within 1e-9 mm.
  explicit CentripetalSpline(std::span<const Point3> control_points);

  /// t in [0, 1] spans the knot range of the control points.
  Point3 evaluate(double t) const;
  /// Segment-local evaluation, u in [0, 1] from point i to point i + 1.
  Point3 evaluate_segment(std::size_t segment, double u) const;

  std::size_t segment_count() const { return controls_.size() - 1; }
  const std::vector<Point3>& control_points() const { return controls_; }
  /// Knot values of the control points, starting at 0.
  std::vector<double> knots() const;

 private:
  std::vector<Point3> controls_;
  std::vector<Point3> extended_;  // phantom, controls..., phantom
  std::vector<double> ext_knots_;
};

Point3 catmull_rom_centripetal(std::span<const Point3> control_points, double t);

inline constexpr double kDefaultLengthTolerance = 0.1;  // mm

struct RodTemplate {
  std::vector<Point3> control_points;
  std::vector<double> knots;
  double estimated_length = 0.0;  // mm
};

/// Arc length by adaptive midpoint subdivision of each segment; refinement
/// stops once splitting changes the local length by less than its share of
/// `tolerance`. Throws InvalidArgument for tolerance <= 0.
double rod_length(const RodTemplate& rod, double tolerance = kDefaultLengthTolerance);

RodTemplate make_rod_template(std::span<const Point3> screw_heads,
                              double tolerance = kDefaultLengthTolerance);

/// `count` points at uniform spline parameter, endpoints included.
std::vector<Point3> sample_rod(const RodTemplate& rod, std::size_t count);

/// Validates consecutive captures; throws PointsTooClose carrying the index
/// of the first point closer than `min_separation` to its predecessor.
std::vector<Point3> screw_head_capture(std::span<const Point3> tip_positions,
                                       double min_separation);

nlohmann::json to_json(const RodTemplate& rod, std::size_t sample_count);

}  // namespace spinenav::navigation

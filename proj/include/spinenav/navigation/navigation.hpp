#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "spinenav/core/types.hpp"

namespace spinenav::navigation {

/// Planned screw in the preoperative frame.
struct ScrewPlan {
  Point3 entry_point = Point3::Zero();
  UnitVector3 trajectory;  // entry -> tip
  double planned_length = 0.0;  // mm

  void validate() const;
};

nlohmann::json to_json(const ScrewPlan& plan);
ScrewPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<ScrewPlan>& plans);
std::vector<ScrewPlan> plans_from_json(const nlohmann::json& j);

/// Angle between two directions in degrees, in [0, 180].
double trajectory_angle(const UnitVector3& current, const UnitVector3& target);

inline constexpr double kDefaultDisplayDistance = 50.0;  // mm

/// A = entry, B on the current tool axis, C on the planned axis, both at
/// distance d from A.
struct FeedbackTriangle {
  Point3 a, b, c;
  double angle_deg = 0.0;
};

FeedbackTriangle feedback_triangle(const Point3& entry, const UnitVector3& current,
                                   const UnitVector3& target,
                                   double display_distance = kDefaultDisplayDistance);

}  // namespace spinenav::navigation

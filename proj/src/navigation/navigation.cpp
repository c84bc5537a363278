#include "spinenav/navigation/navigation.hpp"

#include <algorithm>
#include <cmath>

#include "spinenav/core/io.hpp"

namespace spinenav::navigation {

void ScrewPlan::validate() const {
  if (!(planned_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "planned_length must be > 0");
  if (!entry_point.allFinite()) throw Error(ErrorCode::InvalidArgument, "entry point not finite");
}

nlohmann::json to_json(const ScrewPlan& plan) {
  return {{"entry_point_mm", io::to_json(plan.entry_point)},
          {"trajectory", io::to_json(plan.trajectory.vec())},
          {"planned_length_mm", plan.planned_length}};
}

ScrewPlan plan_from_json(const nlohmann::json& j) {
  ScrewPlan p;
  try {
    p.entry_point = io::point_from_json(j.at("entry_point_mm"));
    p.trajectory = UnitVector3(io::point_from_json(j.at("trajectory")));
    p.planned_length = j.at("planned_length_mm").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("screw plan: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const std::vector<ScrewPlan>& plans) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : plans) arr.push_back(to_json(p));
  return arr;
}

std::vector<ScrewPlan> plans_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "screw plans must be a JSON array");
  std::vector<ScrewPlan> out;
  for (const auto& e : j) out.push_back(plan_from_json(e));
  return out;
}

double trajectory_angle(const UnitVector3& current, const UnitVector3& target) {
  const double c = std::clamp(current.dot(target.vec()), -1.0, 1.0);
  return rad_to_deg(std::acos(c));
}

FeedbackTriangle feedback_triangle(const Point3& entry, const UnitVector3& current,
                                   const UnitVector3& target, double display_distance) {
  if (!(display_distance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "display distance must be > 0");
  }
  return {entry, entry + display_distance * current.vec(), entry + display_distance * target.vec(),
          trajectory_angle(current, target)};
}

}  // namespace spinenav::navigation

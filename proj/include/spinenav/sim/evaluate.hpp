#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "spinenav/navigation/navigation.hpp"
#include "spinenav/registration/registration.hpp"
#include "spinenav/sim/phantom.hpp"

namespace spinenav::sim {

/// Line fit to samples of a cylindrical wire: PCA major axis through the
/// centroid. Samples are ordered head to tip; the direction points from the
/// first sample's end toward the last.
///
/// Throws DegenerateGeometry for fewer than 10 points or when the major
/// eigenvalue is not > 5x the second.
Ray fit_trajectory_axis(const PointCloud& wire_points);

/// Either segmented wire samples or an already fitted axis.
using ExecutedTrajectory = std::variant<PointCloud, Ray>;

struct Stats {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1), 0 for n < 2
  double min = 0.0;
  double max = 0.0;
};

Stats summarize(std::span<const double> values);

struct ScrewOutcome {
  double trajectory_error_deg = 0.0;
  std::optional<double> entry_error_mm;  // nullopt when the axis misses the model
  std::optional<Point3> executed_entry;
};

struct VertebraRecord {
  double registration_rmse_mm = 0.0;
  std::size_t n_points = 0;
  double digitization_time_s = 0.0;  // simulated
};

struct TrialReport {
  std::vector<ScrewOutcome> screws;
  std::vector<VertebraRecord> vertebrae;
  std::size_t missed_entries = 0;
  Stats trajectory_error_deg;
  Stats entry_point_error_mm;
  Stats registration_rmse_mm;
  Stats digitization_time_s;
  Stats points_collected;

  /// Rebuilds every aggregate from the per-item values.
  void recompute();
  static TrialReport combine(std::span<const TrialReport> parts);
};

nlohmann::json to_json(const TrialReport& report);
/// Aligned-column table with the Table-1 style rows.
std::string format_table(const TrialReport& report);

/// Entry point of a trajectory line: first model intersection when arriving
/// along `axis.direction` from outside the model's bounding box.
std::optional<Point3> quantify_entry_point(const TriangleMesh& mesh, const Ray& axis);

/// Per screw: angle between planned and executed directions and distance
/// between planned and quantified entry points. Throws MismatchedLengths.
TrialReport evaluate_trial(const TriangleMesh& mesh, std::span<const navigation::ScrewPlan> plans,
                           std::span<const ExecutedTrajectory> executed,
                           std::optional<VertebraRecord> vertebra = std::nullopt);

TrialReport evaluate_trial(const PhantomSpec& spec, std::span<const ExecutedTrajectory> executed,
                           const registration::RegistrationResult& reg,
                           double sampling_rate_hz = 16.0);

nlohmann::json executed_to_json(std::span<const ExecutedTrajectory> executed);
std::vector<ExecutedTrajectory> executed_from_json(const nlohmann::json& j);

}  // namespace spinenav::sim

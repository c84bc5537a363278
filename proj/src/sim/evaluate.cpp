#include "spinenav/sim/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spinenav/core/geometry.hpp"
#include "spinenav/core/io.hpp"

namespace spinenav::sim {

Ray fit_trajectory_axis(const PointCloud& wire_points) {
  if (wire_points.size() < 10) {
    throw Error(ErrorCode::DegenerateGeometry, "axis fit needs at least 10 wire samples");
  }
  // Own eigen-decomposition rather than pca_axes: an exact line (rank 1) is
  // the ideal input here.
  const Point3 c = centroid(wire_points.points);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : wire_points.points) cov.noalias() += (p - c) * (p - c).transpose();
  cov /= static_cast<double>(wire_points.size());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const double major = eig.eigenvalues()(2);
  if (!(major > 0.0) || !(major > 5.0 * std::max(0.0, eig.eigenvalues()(1)))) {
    throw Error(ErrorCode::DegenerateGeometry, "wire samples have no dominant axis");
  }
  Eigen::Vector3d dir = eig.eigenvectors().col(2).normalized();
  const double head = dir.dot(wire_points.points.front() - c);
  const double tip = dir.dot(wire_points.points.back() - c);
  if (tip < head) dir = -dir;
  return {c, UnitVector3::assume_normalized(dir)};
}

Stats summarize(std::span<const double> values) {
  Stats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void TrialReport::recompute() {
  std::vector<double> traj, entry, rmse, time, pts;
  missed_entries = 0;
  for (const auto& s : screws) {
    traj.push_back(s.trajectory_error_deg);
    if (s.entry_error_mm) entry.push_back(*s.entry_error_mm);
    else ++missed_entries;
  }
  for (const auto& v : vertebrae) {
    rmse.push_back(v.registration_rmse_mm);
    time.push_back(v.digitization_time_s);
    pts.push_back(static_cast<double>(v.n_points));
  }
  trajectory_error_deg = summarize(traj);
  entry_point_error_mm = summarize(entry);
  registration_rmse_mm = summarize(rmse);
  digitization_time_s = summarize(time);
  points_collected = summarize(pts);
}

TrialReport TrialReport::combine(std::span<const TrialReport> parts) {
  TrialReport out;
  for (const auto& p : parts) {
    out.screws.insert(out.screws.end(), p.screws.begin(), p.screws.end());
    out.vertebrae.insert(out.vertebrae.end(), p.vertebrae.begin(), p.vertebrae.end());
  }
  out.recompute();
  return out;
}

namespace {

nlohmann::json stats_json(const Stats& s) {
  return {{"n", s.count}, {"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}};
}

}  // namespace

nlohmann::json to_json(const TrialReport& report) {
  nlohmann::json screws = nlohmann::json::array();
  for (const auto& s : report.screws) {
    nlohmann::json j = {{"trajectory_error_deg", s.trajectory_error_deg}};
    j["entry_point_error_mm"] = s.entry_error_mm ? nlohmann::json(*s.entry_error_mm) : nlohmann::json();
    j["executed_entry_mm"] = s.executed_entry ? io::to_json(*s.executed_entry) : nlohmann::json();
    screws.push_back(j);
  }
  nlohmann::json vertebrae = nlohmann::json::array();
  for (const auto& v : report.vertebrae) {
    vertebrae.push_back({{"registration_rmse_mm", v.registration_rmse_mm},
                         {"n_points", v.n_points},
                         {"digitization_time_s_simulated", v.digitization_time_s}});
  }
  return {{"screws", screws},
          {"vertebrae", vertebrae},
          {"missed_entries", report.missed_entries},
          {"summary",
           {{"trajectory_error_deg", stats_json(report.trajectory_error_deg)},
            {"entry_point_error_mm", stats_json(report.entry_point_error_mm)},
            {"registration_rmse_mm", stats_json(report.registration_rmse_mm)},
            {"digitization_time_s_simulated", stats_json(report.digitization_time_s)},
            {"points_collected", stats_json(report.points_collected)}}}};
}

std::string format_table(const TrialReport& report) {
  std::ostringstream os;
  os << std::fixed;
  auto row = [&](const std::string& name, const Stats& s, int precision) {
    os << std::left << std::setw(34) << name << std::right << std::setprecision(precision)
       << std::setw(10) << s.mean << std::setw(10) << s.sd << std::setw(10) << s.min
       << std::setw(10) << s.max << std::setw(6) << s.count << '\n';
  };
  os << std::left << std::setw(34) << "Result" << std::right << std::setw(10) << "Mean"
     << std::setw(10) << "SD" << std::setw(10) << "min." << std::setw(10) << "max."
     << std::setw(6) << "n" << '\n';
  row("Trajectory err. (deg)", report.trajectory_error_deg, 2);
  row("Entry point err. (mm)", report.entry_point_error_mm, 2);
  row("Reg. RMSE (mm)", report.registration_rmse_mm, 2);
  row("Digitization time (s, simulated)", report.digitization_time_s, 0);
  row("# points collected", report.points_collected, 0);
  if (report.missed_entries > 0) {
    os << "Trajectories missing the model: " << report.missed_entries << '\n';
  }
  return os.str();
}

std::optional<Point3> quantify_entry_point(const TriangleMesh& mesh, const Ray& axis) {
  Eigen::Vector3d lo = mesh.vertices.front(), hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const Point3 centre = 0.5 * (lo + hi);
  const double back_off = (axis.origin - centre).norm() + (hi - lo).norm() + 1.0;
  const Ray from_outside{axis.origin - back_off * axis.direction.vec(), axis.direction};
  return ray_mesh_first_intersection(from_outside, mesh);
}

TrialReport evaluate_trial(const TriangleMesh& mesh, std::span<const navigation::ScrewPlan> plans,
                           std::span<const ExecutedTrajectory> executed,
                           std::optional<VertebraRecord> vertebra) {
  if (plans.size() != executed.size()) {
    throw Error(ErrorCode::MismatchedLengths, "executed trajectory count differs from plan count");
  }
  TrialReport report;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const Ray axis = std::holds_alternative<Ray>(executed[i])
                         ? std::get<Ray>(executed[i])
                         : fit_trajectory_axis(std::get<PointCloud>(executed[i]));
    ScrewOutcome s;
    s.trajectory_error_deg = navigation::trajectory_angle(plans[i].trajectory, axis.direction);
    s.executed_entry = quantify_entry_point(mesh, axis);
    if (s.executed_entry) s.entry_error_mm = (*s.executed_entry - plans[i].entry_point).norm();
    report.screws.push_back(s);
  }
  if (vertebra) report.vertebrae.push_back(*vertebra);
  report.recompute();
  return report;
}

TrialReport evaluate_trial(const PhantomSpec& spec, std::span<const ExecutedTrajectory> executed,
                           const registration::RegistrationResult& reg, double sampling_rate_hz) {
  const VertebraRecord v{reg.final_rmse, reg.intra_points,
                         static_cast<double>(reg.intra_points) / sampling_rate_hz};
  return evaluate_trial(spec.mesh, spec.plans, executed, v);
}

nlohmann::json executed_to_json(std::span<const ExecutedTrajectory> executed) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : executed) {
    if (const auto* ray = std::get_if<Ray>(&e)) {
      arr.push_back({{"origin_mm", io::to_json(ray->origin)},
                     {"direction", io::to_json(ray->direction.vec())}});
    } else {
      nlohmann::json pts = nlohmann::json::array();
      for (const auto& p : std::get<PointCloud>(e).points) pts.push_back(io::to_json(p));
      arr.push_back({{"wire_points_mm", pts}});
    }
  }
  return arr;
}

std::vector<ExecutedTrajectory> executed_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "executed trajectories must be an array");
  std::vector<ExecutedTrajectory> out;
  for (const auto& e : j) {
    if (e.contains("wire_points_mm")) {
      PointCloud pc;
      for (const auto& p : e.at("wire_points_mm")) pc.points.push_back(io::point_from_json(p));
      out.emplace_back(std::move(pc));
    } else if (e.contains("origin_mm") && e.contains("direction")) {
      out.emplace_back(Ray{io::point_from_json(e.at("origin_mm")),
                           UnitVector3(io::point_from_json(e.at("direction")))});
    } else {
      throw Error(ErrorCode::ParseError,
                  "executed entry needs 'wire_points_mm' or 'origin_mm' + 'direction'");
    }
  }
  return out;
}

}  // namespace spinenav::sim

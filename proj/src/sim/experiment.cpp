#include "spinenav/sim/experiment.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include "spinenav/core/geometry.hpp"
#include "spinenav/core/io.hpp"
#include "spinenav/sim/random.hpp"

namespace spinenav::sim {

void ExecutionModel::validate() const {
  if (angle_sigma_deg < 0.0 || entry_jitter_mm < 0.0) {
    throw Error(ErrorCode::InvalidParams, "execution noise must be >= 0");
  }
  if (!(wire_radius_mm > 0.0) || wire_protrusion_mm < 0.0) {
    throw Error(ErrorCode::InvalidParams, "wire geometry must be positive");
  }
  if (wire_rings < 4 || wire_ring_points < 3) {
    throw Error(ErrorCode::InvalidParams, "wire needs >= 4 rings of >= 3 points");
  }
}

void ExperimentConfig::validate() const {
  if (schema_version != kExperimentSchemaVersion) {
    throw Error(ErrorCode::InvalidParams,
                "unsupported schema_version " + std::to_string(schema_version));
  }
  if (vertebrae <= 0) throw Error(ErrorCode::InvalidParams, "vertebrae must be > 0");
  phantom.validate();
  digitization.validate();
  registration.validate();
  execution.validate();
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  auto digitization = to_json(cfg.digitization);
  digitization.erase("seed");
  return {{"schema_version", cfg.schema_version},
          {"seed", cfg.seed},
          {"vertebrae", cfg.vertebrae},
          {"phantom", to_json(cfg.phantom)},
          {"digitization", digitization},
          {"registration", registration::to_json(cfg.registration)},
          {"execution",
           {{"angle_sigma_deg", cfg.execution.angle_sigma_deg},
            {"entry_jitter_mm", cfg.execution.entry_jitter_mm},
            {"wire_radius_mm", cfg.execution.wire_radius_mm},
            {"wire_protrusion_mm", cfg.execution.wire_protrusion_mm},
            {"wire_rings", cfg.execution.wire_rings},
            {"wire_ring_points", cfg.execution.wire_ring_points}}}};
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (!j.is_object() || !j.contains("schema_version")) {
    throw Error(ErrorCode::ParseError, "experiment config needs 'schema_version'");
  }
  try {
    cfg.schema_version = j.at("schema_version").get<int>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.vertebrae = j.value("vertebrae", cfg.vertebrae);
    if (j.contains("phantom")) cfg.phantom = phantom_params_from_json(j.at("phantom"));
    if (j.contains("digitization")) cfg.digitization = digitization_from_json(j.at("digitization"));
    if (j.contains("registration")) {
      cfg.registration = registration::config_from_json(j.at("registration"));
    }
    if (j.contains("execution")) {
      const auto& e = j.at("execution");
      auto& x = cfg.execution;
      x.angle_sigma_deg = e.value("angle_sigma_deg", x.angle_sigma_deg);
      x.entry_jitter_mm = e.value("entry_jitter_mm", x.entry_jitter_mm);
      x.wire_radius_mm = e.value("wire_radius_mm", x.wire_radius_mm);
      x.wire_protrusion_mm = e.value("wire_protrusion_mm", x.wire_protrusion_mm);
      x.wire_rings = e.value("wire_rings", x.wire_rings);
      x.wire_ring_points = e.value("wire_ring_points", x.wire_ring_points);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PointCloud wire_samples(const Point3& entry, const UnitVector3& direction, double length,
                        const ExecutionModel& model) {
  const Eigen::Vector3d d = direction.vec();
  const Eigen::Vector3d u = d.unitOrthogonal();
  const Eigen::Vector3d v = d.cross(u);
  const double start = -model.wire_protrusion_mm;
  const double step = (length - start) / (model.wire_rings - 1);
  PointCloud pc;
  for (int r = 0; r < model.wire_rings; ++r) {
    const Point3 c = entry + (start + step * r) * d;
    for (int k = 0; k < model.wire_ring_points; ++k) {
      const double a = 2.0 * std::numbers::pi * k / model.wire_ring_points;
      pc.points.push_back(c + model.wire_radius_mm * (std::cos(a) * u + std::sin(a) * v));
    }
  }
  return pc;
}

namespace {

std::filesystem::path vertebra_dir(const std::filesystem::path& root, int index) {
  auto dir = root / ("vertebra_" + std::to_string(index));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

SimulatedInputs simulate_inputs(const ExperimentConfig& cfg, int index,
                                const std::filesystem::path* out_dir) {
  cfg.validate();
  const auto stream = static_cast<std::uint64_t>(index);
  std::filesystem::path dir;
  if (out_dir) dir = vertebra_dir(*out_dir, index);

  SimulatedInputs in;
  in.phantom = generate_phantom(derive_seed(cfg.seed, 100 + stream), cfg.phantom);
  const auto& spec = in.phantom;
  if (out_dir) {
    io::write_ply(dir / "model_mesh.ply", spec.mesh);
    io::write_ply(dir / "model_cloud.ply", spec.model_cloud());
    io::write_json(dir / "ground_truth.json", io::to_json(spec.ground_truth_pose));
    io::write_json(dir / "plans.json", navigation::to_json(spec.plans));
  }

  DigitizationSim dsim = cfg.digitization;
  dsim.seed = derive_seed(cfg.seed, 200 + stream);
  in.digitization = simulate_digitization(spec, dsim);
  if (out_dir) io::write_ply(dir / "intra.ply", in.digitization.cloud);
  return in;
}

VertebraArtifacts run_vertebra(const ExperimentConfig& cfg, int index,
                               const std::filesystem::path* out_dir) {
  const auto stream = static_cast<std::uint64_t>(index);
  auto inputs = simulate_inputs(cfg, index, out_dir);
  std::filesystem::path dir;
  if (out_dir) dir = vertebra_dir(*out_dir, index);

  VertebraArtifacts art;
  art.phantom = std::move(inputs.phantom);
  art.digitization = std::move(inputs.digitization);
  const auto& spec = art.phantom;

  art.registration = registration::register_surface(art.digitization.cloud, spec.model_cloud(),
                                                    spec.approach, cfg.registration);
  if (out_dir) io::write_json(dir / "registration.json", registration::to_json(art.registration));

  // Navigation shows the plan in the patient frame through the estimated
  // registration; the executed wire is mapped back with the true pose, as a
  // postoperative scan aligned to the plan would be.
  Rng rng(derive_seed(cfg.seed, 300 + stream));
  const RigidTransform displayed = art.registration.transform.inverse();
  const RigidTransform postop = spec.ground_truth_pose.inverse();
  const auto& ex = cfg.execution;
  for (const auto& plan : spec.plans) {
    const Point3 entry = displayed.apply(plan.entry_point);
    const UnitVector3 dir = displayed.rotate(plan.trajectory);
    const UnitVector3 jitter_u = random_perpendicular(rng, dir);
    const Eigen::Vector3d jitter_v = dir.vec().cross(jitter_u.vec());
    const Point3 exec_entry = entry + gaussian(rng, ex.entry_jitter_mm) * jitter_u.vec() +
                              gaussian(rng, ex.entry_jitter_mm) * jitter_v;
    const UnitVector3 tilt_axis = random_perpendicular(rng, dir);
    const double tilt = deg_to_rad(gaussian(rng, ex.angle_sigma_deg));
    const UnitVector3 exec_dir =
        RigidTransform::rotation_about(tilt_axis.vec(), tilt).rotate(dir);
    const auto wire = wire_samples(exec_entry, exec_dir, plan.planned_length, ex);
    art.executed.emplace_back(apply_transform(postop, wire));
  }
  if (out_dir) io::write_json(dir / "executed.json", executed_to_json(art.executed));

  art.report = evaluate_trial(spec, art.executed, art.registration, cfg.digitization.sampling_rate_hz);
  if (out_dir) io::write_json(dir / "report.json", to_json(art.report));
  return art;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path* out_dir) {
  cfg.validate();
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    io::write_json(*out_dir / "config.json", to_json(cfg));
  }
  ExperimentOutcome outcome;
  outcome.vertebrae.resize(static_cast<std::size_t>(cfg.vertebrae));
  std::vector<std::exception_ptr> errors(outcome.vertebrae.size());
#pragma omp parallel for schedule(dynamic)
  for (int v = 0; v < cfg.vertebrae; ++v) {
    try {
      outcome.vertebrae[static_cast<std::size_t>(v)] = run_vertebra(cfg, v, out_dir);
    } catch (...) {
      errors[static_cast<std::size_t>(v)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<TrialReport> parts;
  for (const auto& v : outcome.vertebrae) parts.push_back(v.report);
  outcome.report = TrialReport::combine(parts);
  if (out_dir) {
    io::write_json(*out_dir / "report.json", to_json(outcome.report));
    io::write_text(*out_dir / "report.txt", format_table(outcome.report));
  }
  return outcome;
}

}  // namespace spinenav::sim

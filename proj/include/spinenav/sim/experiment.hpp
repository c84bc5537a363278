#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "spinenav/registration/registration.hpp"
#include "spinenav/sim/digitization.hpp"
#include "spinenav/sim/evaluate.hpp"
#include "spinenav/sim/phantom.hpp"

namespace spinenav::sim {

inline constexpr int kExperimentSchemaVersion = 1;

/// Simulated navigated K-wire insertion.
struct ExecutionModel {
  double angle_sigma_deg = 0.0;  // tilt about the entry point
  double entry_jitter_mm = 0.0;  // per-axis, in the plane normal to the plan
  double wire_radius_mm = 0.8;
  double wire_protrusion_mm = 10.0;  // wire length outside the bone
  int wire_rings = 40;
  int wire_ring_points = 12;

  void validate() const;
};

struct ExperimentConfig {
  int schema_version = kExperimentSchemaVersion;
  std::uint64_t seed = 1;
  int vertebrae = 2;
  PhantomParams phantom;
  DigitizationSim digitization;  // its seed is re-derived per vertebra
  registration::RegistrationConfig registration;
  ExecutionModel execution;

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Requires "schema_version" == 1; other missing keys keep their defaults.
ExperimentConfig experiment_from_json(const nlohmann::json& j);

struct VertebraArtifacts {
  PhantomSpec phantom;
  Digitization digitization;
  registration::RegistrationResult registration;
  std::vector<ExecutedTrajectory> executed;  // preoperative frame
  TrialReport report;
};

struct ExperimentOutcome {
  std::vector<VertebraArtifacts> vertebrae;
  TrialReport report;
};

/// Synthetic wire samples (rings along the axis, head first) for a wire
/// entering at `entry` along `direction` with `length` inside the bone.
PointCloud wire_samples(const Point3& entry, const UnitVector3& direction, double length,
                        const ExecutionModel& model);

struct SimulatedInputs {
  PhantomSpec phantom;
  Digitization digitization;
};

/// generate -> digitize for one vertebra, with the same seeds run_vertebra
/// uses. With `out_dir`, writes the model, plans, ground truth and intra
/// cloud to `out_dir/vertebra_<index>/`.
SimulatedInputs simulate_inputs(const ExperimentConfig& cfg, int index,
                                const std::filesystem::path* out_dir = nullptr);

/// generate -> digitize -> register -> navigated execution -> evaluate for
/// one vertebra. Deterministic per seed. With `out_dir`, each stage's output
/// is written to `out_dir/vertebra_<index>/` as soon as it exists, so a
/// failing stage leaves the earlier artifacts behind.
VertebraArtifacts run_vertebra(const ExperimentConfig& cfg, int index,
                               const std::filesystem::path* out_dir = nullptr);

/// All vertebrae (in parallel), combined into one report. With `out_dir`,
/// also writes config.json, report.json and report.txt there.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                 const std::filesystem::path* out_dir = nullptr);

}  // namespace spinenav::sim

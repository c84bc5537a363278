// spinenav command line: simulation, registration, tracking, rod templates
// and trial evaluation on files.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spinenav/core/error.hpp"
#include "spinenav/core/io.hpp"
#include "spinenav/navigation/navigation.hpp"
#include "spinenav/navigation/rod.hpp"
#include "spinenav/registration/registration.hpp"
#include "spinenav/sim/evaluate.hpp"
#include "spinenav/sim/experiment.hpp"
#include "spinenav/sim/random.hpp"
#include "spinenav/sim/stereo_sim.hpp"
#include "spinenav/stereo/tracker.hpp"

namespace fs = std::filesystem;
using namespace spinenav;

namespace {

std::vector<double> parse_numbers(const std::string& line) {
  std::vector<double> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(field, &used));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "not a number: '" + field + "'");
    }
  }
  return out;
}

UnitVector3 parse_direction(const std::string& text) {
  const auto v = parse_numbers(text);
  if (v.size() != 3) throw Error(ErrorCode::ParseError, "direction needs three components");
  return UnitVector3(Eigen::Vector3d(v[0], v[1], v[2]));
}

// x,y,z per line; blank lines, '#' comments and a non-numeric header are skipped.
std::vector<Point3> read_points_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<Point3> pts;
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    if (pts.empty() && !(std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '-' ||
                         line[0] == '+' || line[0] == '.')) {
      continue;
    }
    const auto v = parse_numbers(line);
    if (v.size() != 3) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(row) + ": expected x,y,z");
    }
    pts.emplace_back(v[0], v[1], v[2]);
  }
  return pts;
}

std::vector<bool> read_mask(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<bool> keep;
  std::string tok;
  while (is >> tok) {
    if (tok == "1") keep.push_back(true);
    else if (tok == "0") keep.push_back(false);
    else throw Error(ErrorCode::ParseError, "mask entries must be 0 or 1, got '" + tok + "'");
  }
  return keep;
}

void emit(const nlohmann::json& j, const std::string& out) {
  if (out.empty()) std::cout << j.dump(2) << '\n';
  else io::write_json(out, j);
}

sim::ExperimentConfig load_config(const std::string& path) {
  return sim::experiment_from_json(io::read_json(path));
}

// Marker drifting on a slow figure-eight about 500 mm in front of the rig.
std::vector<sim::TimedPose> marker_path(int frames, double rate_hz, std::uint64_t seed) {
  sim::Rng rng(seed);
  const double phase = sim::uniform(rng, 0.0, 2.0 * std::numbers::pi);
  std::vector<sim::TimedPose> path;
  for (int k = 0; k < frames; ++k) {
    const double t = k / rate_hz;
    const double a = 0.8 * t + phase;
    const Point3 centre(60.0 * std::sin(a), 30.0 * std::sin(2.0 * a), 500.0 + 40.0 * std::cos(a));
    const RigidTransform tilt =
        RigidTransform::rotation_about(Eigen::Vector3d(1.0, 0.3, 0.0), 0.25 * std::sin(1.3 * a)) *
        RigidTransform::rotation_about(Eigen::Vector3d::UnitZ(), 0.4 * std::cos(a));
    path.push_back({t, RigidTransform::translation(centre) * tilt});
  }
  return path;
}

struct SimulateArgs {
  std::string config, out;
  bool stereo = false;
  int frames = 90;
  double rate_hz = 30.0;
  double pixel_noise = 1.0;
  double marker_side = 50.0;
};

void run_simulate(const SimulateArgs& a) {
  const auto cfg = load_config(a.config);
  const fs::path out(a.out);
  fs::create_directories(out);
  io::write_json(out / "config.json", sim::to_json(cfg));
  for (int v = 0; v < cfg.vertebrae; ++v) sim::simulate_inputs(cfg, v, &out);

  if (!a.stereo) return;
  const fs::path dir = out / "stereo";
  fs::create_directories(dir);
  const auto rig = sim::default_rig();
  const auto geom = stereo::MarkerGeometry::square(a.marker_side);
  const auto path = marker_path(a.frames, a.rate_hz, sim::derive_seed(cfg.seed, 400));
  const auto res = sim::simulate_stereo_observations(rig, path, geom, a.pixel_noise,
                                                     sim::derive_seed(cfg.seed, 401));
  io::write_json(dir / "rig.json", stereo::to_json(rig));
  io::write_json(dir / "marker.json", stereo::to_json(geom));
  std::ofstream csv(dir / "stream.csv");
  if (!csv) throw Error(ErrorCode::IoError, "cannot write " + (dir / "stream.csv").string());
  stereo::write_observation_csv(csv, res.records);
  nlohmann::json truth = nlohmann::json::array();
  for (const auto& p : res.visible) truth.push_back({{"timestamp_s", p.timestamp}, {"pose", io::to_json(p.pose)}});
  io::write_json(dir / "truth.json", {{"frames", truth}, {"skipped_timestamps_s", res.skipped_timestamps}});
}

struct RegisterArgs {
  std::string intra, pre, approach = "0,0,-1", config, keep_mask, out;
};

void run_register(const RegisterArgs& a) {
  registration::RegistrationConfig rcfg;
  if (!a.config.empty()) rcfg = load_config(a.config).registration;
  const auto intra = io::read_ply_cloud(a.intra);
  const auto pre = io::read_ply_cloud(a.pre);
  registration::RegistrationResult result;
  if (!a.keep_mask.empty()) {
    result = registration::register_trimmed(intra, registration::trim_by_mask(pre, read_mask(a.keep_mask)), rcfg);
  } else {
    result = registration::register_surface(intra, pre, parse_direction(a.approach), rcfg);
  }
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  emit(registration::to_json(result), a.out);
}

struct TrackArgs {
  std::string rig, obs, marker, out;
  double process_accel = stereo::KalmanNoise{}.process_accel;
  double measurement_var = stereo::KalmanNoise{}.measurement_var;
  double max_reprojection = stereo::PoseOptions{}.max_reprojection_rmse_px;
};

void run_track(const TrackArgs& a) {
  const auto rig = stereo::rig_from_json(io::read_json(a.rig));
  const auto geom = stereo::marker_from_json(io::read_json(a.marker));
  std::ifstream is(a.obs);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + a.obs);
  const auto records = stereo::read_observation_csv(is);

  stereo::KalmanNoise noise;
  noise.process_accel = a.process_accel;
  noise.measurement_var = a.measurement_var;
  stereo::PoseOptions options;
  options.max_reprojection_rmse_px = a.max_reprojection;
  stereo::MarkerTracker tracker(rig, geom, noise, options);
  const auto frames = tracker.process(records);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw Error(ErrorCode::IoError, "cannot write " + a.out);
  }
  std::ostream& os = a.out.empty() ? std::cout : file;
  for (const auto& f : frames) os << stereo::to_json(f).dump() << '\n';
}

struct RodArgs {
  std::string heads, out;
  double tolerance = navigation::kDefaultLengthTolerance;
  double min_separation = 5.0;
  std::size_t samples = 50;
};

void run_rod(const RodArgs& a) {
  const auto heads = navigation::screw_head_capture(read_points_csv(a.heads), a.min_separation);
  const auto rod = navigation::make_rod_template(heads, a.tolerance);
  emit(navigation::to_json(rod, a.samples), a.out);
}

struct EvaluateArgs {
  std::string mesh, plans, executed, registration, out, text;
  double sampling_rate_hz = 16.0;
};

void run_evaluate(const EvaluateArgs& a) {
  const auto mesh = io::read_ply_mesh(a.mesh);
  const auto plans = navigation::plans_from_json(io::read_json(a.plans));
  const auto executed = sim::executed_from_json(io::read_json(a.executed));
  std::optional<sim::VertebraRecord> record;
  if (!a.registration.empty()) {
    const auto reg = io::read_json(a.registration);
    try {
      sim::VertebraRecord r;
      r.registration_rmse_mm = reg.at("final_rmse_mm").get<double>();
      r.n_points = reg.at("intra_points").get<std::size_t>();
      r.digitization_time_s = static_cast<double>(r.n_points) / a.sampling_rate_hz;
      record = r;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("registration result: ") + e.what());
    }
  }
  const auto report = sim::evaluate_trial(mesh, plans, executed, record);
  if (!a.out.empty()) io::write_json(a.out, sim::to_json(report));
  if (!a.text.empty()) io::write_text(a.text, sim::format_table(report));
  if (a.out.empty()) std::cout << sim::format_table(report);
}

void run_experiment_cmd(const std::string& config, const std::string& out) {
  const auto cfg = load_config(config);
  const fs::path dir(out);
  const auto outcome = sim::run_experiment(cfg, &dir);
  std::cout << sim::format_table(outcome.report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surface registration, marker tracking and screw navigation tools"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Generate phantoms, digitized clouds and optionally a stereo stream");
  simulate->add_option("--config", sim_args.config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_args.out, "Output directory")->required();
  simulate->add_flag("--stereo", sim_args.stereo, "Also write rig.json, marker.json and stream.csv");
  simulate->add_option("--frames", sim_args.frames, "Stereo frames")->check(CLI::PositiveNumber);
  simulate->add_option("--rate", sim_args.rate_hz, "Stereo frame rate (Hz)")->check(CLI::PositiveNumber);
  simulate->add_option("--pixel-noise", sim_args.pixel_noise, "Pixel noise sigma (px)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--marker-side", sim_args.marker_side, "Marker side length (mm)")->check(CLI::PositiveNumber);

  RegisterArgs reg_args;
  auto* reg = app.add_subcommand("register", "Register an intraoperative cloud to the model cloud");
  reg->add_option("--intra", reg_args.intra, "Digitized points (PLY)")->required()->check(CLI::ExistingFile);
  reg->add_option("--pre", reg_args.pre, "Model cloud with normals (PLY)")->required()->check(CLI::ExistingFile);
  reg->add_option("--approach", reg_args.approach, "Approach direction x,y,z")->capture_default_str();
  reg->add_option("--config", reg_args.config, "Experiment config JSON (registration section)")->check(CLI::ExistingFile);
  reg->add_option("--keep-mask", reg_args.keep_mask, "Per-point 0/1 keep mask instead of normal trimming")
      ->check(CLI::ExistingFile);
  reg->add_option("--out", reg_args.out, "Result JSON (default stdout)");

  TrackArgs track_args;
  auto* track = app.add_subcommand("track", "Filter a corner observation stream and estimate marker poses");
  track->add_option("--rig", track_args.rig, "Rig JSON")->required()->check(CLI::ExistingFile);
  track->add_option("--obs", track_args.obs, "Observation CSV")->required()->check(CLI::ExistingFile);
  track->add_option("--marker", track_args.marker, "Marker JSON")->required()->check(CLI::ExistingFile);
  track->add_option("--process-accel", track_args.process_accel, "Acceleration noise (px/s^2)")->capture_default_str();
  track->add_option("--measurement-var", track_args.measurement_var, "Measurement variance (px^2)")->capture_default_str();
  track->add_option("--max-reprojection", track_args.max_reprojection, "Reject threshold (px)")->capture_default_str();
  track->add_option("--out", track_args.out, "JSON lines output (default stdout)");

  RodArgs rod_args;
  auto* rod = app.add_subcommand("rod-template", "Spline through captured screw heads and rod length");
  rod->add_option("--heads", rod_args.heads, "Screw heads CSV (x,y,z)")->required()->check(CLI::ExistingFile);
  rod->add_option("--tolerance", rod_args.tolerance, "Length tolerance (mm)")->capture_default_str()->check(CLI::PositiveNumber);
  rod->add_option("--min-separation", rod_args.min_separation, "Minimum head spacing (mm)")->capture_default_str();
  rod->add_option("--samples", rod_args.samples, "Polyline samples")->capture_default_str();
  rod->add_option("--out", rod_args.out, "Template JSON (default stdout)");

  EvaluateArgs eval_args;
  auto* eval = app.add_subcommand("evaluate", "Trajectory and entry point errors against the plans");
  eval->add_option("--mesh", eval_args.mesh, "Model mesh (PLY)")->required()->check(CLI::ExistingFile);
  eval->add_option("--plans", eval_args.plans, "Screw plans JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--executed", eval_args.executed, "Executed trajectories JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--registration", eval_args.registration, "Registration result JSON")->check(CLI::ExistingFile);
  eval->add_option("--sampling-rate", eval_args.sampling_rate_hz, "Digitizer rate (Hz)")->capture_default_str();
  eval->add_option("--out", eval_args.out, "Report JSON");
  eval->add_option("--text", eval_args.text, "Report table");

  std::string exp_config, exp_out;
  auto* exp = app.add_subcommand("run-experiment", "End-to-end simulated experiment");
  exp->add_option("--config", exp_config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", exp_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) run_simulate(sim_args);
    else if (*reg) run_register(reg_args);
    else if (*track) run_track(track_args);
    else if (*rod) run_rod(rod_args);
    else if (*eval) run_evaluate(eval_args);
    else if (*exp) run_experiment_cmd(exp_config, exp_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#include "spinenav/sim/digitization.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "spinenav/kernels/kdtree.hpp"

#include "spinenav/sim/random.hpp"

namespace spinenav::sim {

void DigitizationSim::validate() const {
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidParams, "noise_sigma must be >= 0");
  if (points_per_stroke <= 0) throw Error(ErrorCode::InvalidParams, "points_per_stroke must be > 0");
  if (strokes.empty()) throw Error(ErrorCode::InvalidParams, "at least one stroke is required");
  if (!(sampling_rate_hz > 0.0)) throw Error(ErrorCode::InvalidParams, "sampling_rate_hz must be > 0");
  if (!(step_cells > 0.0)) throw Error(ErrorCode::InvalidParams, "step_cells must be > 0");
}

nlohmann::json to_json(const DigitizationSim& d) {
  return {{"noise_sigma_mm", d.noise_sigma},
          {"points_per_stroke", d.points_per_stroke},
          {"strokes", d.strokes},
          {"seed", d.seed},
          {"sampling_rate_hz", d.sampling_rate_hz},
          {"step_cells", d.step_cells}};
}

DigitizationSim digitization_from_json(const nlohmann::json& j) {
  DigitizationSim d;
  try {
    d.noise_sigma = j.value("noise_sigma_mm", d.noise_sigma);
    d.points_per_stroke = j.value("points_per_stroke", d.points_per_stroke);
    if (j.contains("strokes")) d.strokes = j.at("strokes").get<std::vector<std::string>>();
    d.seed = j.value("seed", d.seed);
    d.sampling_rate_hz = j.value("sampling_rate_hz", d.sampling_rate_hz);
    d.step_cells = j.value("step_cells", d.step_cells);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("digitization: ") + e.what());
  }
  d.validate();
  return d;
}

Digitization simulate_digitization(const PhantomSpec& spec, const DigitizationSim& sim) {
  sim.validate();

  // Region -> member vertices (path support) and model samples (what gets recorded).
  const std::size_t n_regions = spec.region_names.size();
  std::vector<std::vector<std::uint32_t>> members(n_regions);
  for (std::uint32_t v = 0; v < spec.vertex_region.size(); ++v) {
    if (spec.vertex_region[v] >= 0) members[static_cast<std::size_t>(spec.vertex_region[v])].push_back(v);
  }
  std::vector<std::vector<std::uint32_t>> sample_ids(n_regions);
  std::vector<std::vector<Point3>> sample_points(n_regions);
  for (std::uint32_t k = 0; k < spec.model_point_face.size(); ++k) {
    const int r = spec.face_region[spec.model_point_face[k]];
    if (r < 0) continue;
    sample_ids[static_cast<std::size_t>(r)].push_back(k);
    sample_points[static_cast<std::size_t>(r)].push_back(spec.model_points.points[k]);
  }
  std::vector<int> stroke_regions;
  for (const auto& name : sim.strokes) {
    const int r = spec.region_index(name);
    if (r < 0 || members[static_cast<std::size_t>(r)].empty() ||
        sample_points[static_cast<std::size_t>(r)].empty()) {
      throw Error(ErrorCode::UnknownRegion, "no reachable region named '" + name + "'");
    }
    stroke_regions.push_back(r);
  }
  std::vector<std::optional<kernels::KdTree>> trees(n_regions);
  for (const int r : stroke_regions) {
    auto& tree = trees[static_cast<std::size_t>(r)];
    if (!tree) tree.emplace(sample_points[static_cast<std::size_t>(r)]);
  }

  Rng rng(sim.seed);
  const int lat = spec.latitude_steps;
  const int lon = spec.longitude_steps;
  const double two_pi = 2.0 * std::numbers::pi;
  auto vertex_of = [&](double row, double col) {
    const int r = std::clamp(static_cast<int>(std::lround(row)), 1, lat - 1);
    return spec.grid_vertex(r, static_cast<int>(std::lround(col)));
  };

  Digitization out;
  for (const int region : stroke_regions) {
    const auto& pool = members[static_cast<std::size_t>(region)];
    const std::uint32_t start =
        pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    double row = 1.0 + static_cast<double>((start - 1) / static_cast<std::uint32_t>(lon));
    double col = static_cast<double>((start - 1) % static_cast<std::uint32_t>(lon));
    double heading = uniform(rng, 0.0, two_pi);

    for (int s = 0; s < sim.points_per_stroke; ++s) {
      heading += gaussian(rng, 0.15);
      const double next_row = row + sim.step_cells * std::sin(heading);
      const double next_col = col + sim.step_cells * std::cos(heading);
      const bool inside = next_row >= 1.0 && next_row <= lat - 1.0 &&
                          spec.vertex_region[vertex_of(next_row, next_col)] == region;
      if (inside) {
        row = next_row;
        col = next_col;
      } else {
        heading += std::numbers::pi + uniform(rng, -0.5, 0.5);
      }
      const Point3& tip = spec.mesh.vertices[vertex_of(row, col)];
      const auto hit = trees[static_cast<std::size_t>(region)]->nearest(tip);
      const std::uint32_t k = sample_ids[static_cast<std::size_t>(region)][hit.index];
      const double offset = gaussian(rng, sim.noise_sigma);
      const Point3 on_model = spec.model_points.points[k] + offset * spec.model_points.normals[k].vec();
      out.cloud.points.push_back(spec.ground_truth_pose.apply(on_model));
      out.model_point_ids.push_back(k);
    }
  }
  out.simulated_time_s = static_cast<double>(out.cloud.size()) / sim.sampling_rate_hz;
  return out;
}

}  // namespace spinenav::sim

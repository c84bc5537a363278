#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "spinenav/sim/phantom.hpp"

namespace spinenav::sim {

/// Pointer-based surface sampling. Each stroke is a wandering path confined
/// to one labelled region; each sample snaps to the nearest model-cloud point
/// of that region and is displaced along its face normal by Gaussian noise.
struct DigitizationSim {
  double noise_sigma = 0.5;  // mm
  int points_per_stroke = 250;
  std::vector<std::string> strokes = {"left_transverse", "left_lamina",  "spinous",
                                      "right_lamina",    "right_transverse", "spinous",
                                      "left_lamina",     "right_lamina"};
  std::uint64_t seed = 1;
  double sampling_rate_hz = 16.0;  // converts point counts to simulated time
  double step_cells = 0.6;         // path advance per sample, in grid cells

  void validate() const;
};

nlohmann::json to_json(const DigitizationSim& d);
DigitizationSim digitization_from_json(const nlohmann::json& j);

struct Digitization {
  PointCloud cloud;  // patient frame
  std::vector<std::uint32_t> model_point_ids;  // model-cloud point behind each sample
  double simulated_time_s = 0.0;
};

/// Throws UnknownRegion for a stroke naming a missing or empty region.
Digitization simulate_digitization(const PhantomSpec& spec, const DigitizationSim& sim);

}  // namespace spinenav::sim

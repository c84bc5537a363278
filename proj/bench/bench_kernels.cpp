// Serial vs OpenMP variants of the two hot kernels: ICP nearest-neighbour
// matching and ray/mesh casting. Inputs come from a default phantom.

#include <benchmark/benchmark.h>

#include "spinenav/kernels/correspondence.hpp"
#include "spinenav/kernels/kdtree.hpp"
#include "spinenav/kernels/ray_cast.hpp"
#include "spinenav/sim/digitization.hpp"
#include "spinenav/sim/phantom.hpp"

namespace {

using namespace spinenav;

struct Fixture {
  sim::PhantomSpec spec = sim::generate_phantom(1);
  kernels::KdTree tree{spec.model_points.points};
  PointCloud intra = sim::simulate_digitization(spec, {}).cloud;
  RigidTransform pose = spec.ground_truth_pose.inverse();
  Ray ray{spec.plans.front().entry_point - 200.0 * spec.plans.front().trajectory.vec(),
          spec.plans.front().trajectory};
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

template <auto Match>
void BM_Match(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto c = Match(f.intra.points, f.pose, f.tree, 20.0);
    benchmark::DoNotOptimize(c.rmse);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.intra.size()));
}

template <auto Cast>
void BM_RayCast(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto hit = Cast(f.ray, f.spec.mesh);
    benchmark::DoNotOptimize(hit);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.spec.mesh.faces.size()));
}

BENCHMARK(BM_Match<kernels::match_serial>)->Name("match/serial");
BENCHMARK(BM_Match<kernels::match_parallel>)->Name("match/parallel");
BENCHMARK(BM_RayCast<kernels::first_hit_serial>)->Name("ray_cast/serial");
BENCHMARK(BM_RayCast<kernels::first_hit_parallel>)->Name("ray_cast/parallel");

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "hybridloc/cloris.hpp"
#include "hybridloc/floris.hpp"
#include "hybridloc/random.hpp"
#include "hybridloc/refine.hpp"
#include "hybridloc/sdp.hpp"
#include "hybridloc/simulate.hpp"

using namespace hybridloc;

namespace {

Mat random_symmetric(RandomStream& rng, int q) {
  Mat g(q, q);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) g(i, j) = rng.next_gaussian();
  return 0.5 * (g + g.transpose());
}

FlorisProblem floris_instance(int dim, double eta, std::uint64_t seed) {
  const Scenario sc =
      generate_single_source(dim, ScenarioCounts{8, 4, 1}, seed);
  const MeasurementSet meas =
      synthesize_measurements(sc, NoiseModel{eta, seed});
  return make_floris_problem(sc, meas);
}

}  // namespace

static void BM_jacobi_eigensym(benchmark::State& state) {
  RandomStream rng(1);
  const Mat S = random_symmetric(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigensym(S));
}
BENCHMARK(BM_jacobi_eigensym)->Arg(21)->Arg(29)->Arg(60);

static void BM_project_psd(benchmark::State& state) {
  RandomStream rng(2);
  const Mat S = random_symmetric(rng, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(project_psd(S));
}
BENCHMARK(BM_project_psd)->Arg(21)->Arg(29);

static void BM_floris_solve(benchmark::State& state) {
  const FlorisProblem problem =
      floris_instance(static_cast<int>(state.range(0)), 0.01, 7);
  for (auto _ : state) benchmark::DoNotOptimize(solve_floris(problem));
}
BENCHMARK(BM_floris_solve)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_floris_reduced_solve(benchmark::State& state) {
  const FlorisProblem problem =
      floris_instance(static_cast<int>(state.range(0)), 0.01, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_floris_reduced(problem));
}
BENCHMARK(BM_floris_reduced_solve)->Arg(2)->Arg(3)
    ->Unit(benchmark::kMillisecond);

static void BM_cloris_iteration(benchmark::State& state) {
  const Scenario sc =
      generate_single_source(2, ScenarioCounts{8, 4, 1}, 3);
  const MeasurementSet meas = synthesize_measurements(sc, NoiseModel{0.1, 3});
  const NetworkProblem problem = make_network_problem(sc, meas);
  ClorisState s = cloris_init(problem, 1);
  for (auto _ : state) benchmark::DoNotOptimize(cloris_step(s, problem));
}
BENCHMARK(BM_cloris_iteration);

static void BM_cloris_solve_single_source(benchmark::State& state) {
  const Scenario sc =
      generate_single_source(2, ScenarioCounts{8, 4, 1}, 3);
  const MeasurementSet meas = synthesize_measurements(sc, NoiseModel{0.1, 3});
  const NetworkProblem problem = make_network_problem(sc, meas);
  for (auto _ : state) {
    ClorisOptions options;
    options.seed = 1;
    benchmark::DoNotOptimize(solve_cloris(problem, options));
  }
}
BENCHMARK(BM_cloris_solve_single_source);

static void BM_refine_simplex(benchmark::State& state) {
  const Scenario sc =
      generate_single_source(3, ScenarioCounts{8, 4, 1}, 5);
  const MeasurementSet meas = synthesize_measurements(sc, NoiseModel{0.1, 5});
  const NetworkProblem problem = make_network_problem(sc, meas);
  const auto [lo, hi] = problem.anchor_bounding_box();
  const Vec start = 0.5 * (lo + hi);
  for (auto _ : state) benchmark::DoNotOptimize(refine(start, problem));
}
BENCHMARK(BM_refine_simplex);

BENCHMARK_MAIN();

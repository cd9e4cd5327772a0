#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hybridloc/scenario.hpp"
#include "hybridloc/simulate.hpp"

namespace hybridloc {

/// Total root-mean-square error over nodes and Monte Carlo runs:
/// sqrt( sum_k sum_i |x_i - xhat_i^k|^2 / (MC * N) ).
double rmse(const std::vector<Vec>& truth,
            const std::vector<std::vector<Vec>>& estimates_per_run);

/// Order-insensitive pairwise sum (deterministic reduction regardless of
/// how run slots were filled).
double pairwise_sum(const std::vector<double>& values);

/// Empirical localizability screen: noiseless solves plus refinement
/// from several random initializations must all land on the truth.
bool localizability_check(const Scenario& scenario, int trials = 5,
                          std::uint64_t seed = 0);

enum class Algorithm {
  floris,
  floris_reduced,
  floris_refine,
  cloris,
  cloris_range_only,
  cloris_single,
  cloris_refine,
};

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct McResult {
  double eta = 0.0;
  std::string algorithm;
  double rmse = 0.0;
  double rank1_fraction = -1.0;  // negative when not applicable
  double mean_iterations = 0.0;
  double mean_runtime_ms = 0.0;
  int runs = 0;
  int failures = 0;
};

struct McConfig {
  ScenarioKind kind = ScenarioKind::single_source_random;
  int dim = 2;
  ScenarioCounts counts;
  std::vector<Algorithm> algorithms;
  std::vector<double> etas;
  int runs = 100;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: HYBRIDLOC_THREADS or hardware concurrency
  std::string scenario_dir;  // canned scenarios
  double sdp_tol = 1e-7;
  int sdp_max_iters = 100000;
  double cloris_tol = 1e-6;
  int cloris_max_iters = 50000;
  double rank1_threshold = 20.0;
};

/// Run the sweep: one scenario and one noise stream per run index,
/// shared across algorithms and noise factors for paired comparisons.
/// Per-run failures are excluded and counted; more than 1% of failing
/// runs aborts the experiment.
std::vector<McResult> run_monte_carlo(const McConfig& config);

/// Worker cap from HYBRIDLOC_THREADS, falling back to hardware
/// concurrency.
int default_worker_count();

}  // namespace hybridloc

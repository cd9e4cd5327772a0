#include "hybridloc/montecarlo.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <optional>
#include <thread>

#include "hybridloc/cloris.hpp"
#include "hybridloc/floris.hpp"
#include "hybridloc/random.hpp"
#include "hybridloc/refine.hpp"

namespace hybridloc {

double pairwise_sum(const std::vector<double>& values) {
  std::function<double(size_t, size_t)> sum = [&](size_t lo,
                                                  size_t hi) -> double {
    if (hi - lo == 0) return 0.0;
    if (hi - lo == 1) return values[lo];
    const size_t mid = lo + (hi - lo) / 2;
    return sum(lo, mid) + sum(mid, hi);
  };
  return sum(0, values.size());
}

double rmse(const std::vector<Vec>& truth,
            const std::vector<std::vector<Vec>>& estimates_per_run) {
  require(!truth.empty() && !estimates_per_run.empty(),
          "rmse: empty input");
  std::vector<double> sq(estimates_per_run.size());
  for (size_t k = 0; k < estimates_per_run.size(); ++k) {
    require(estimates_per_run[k].size() == truth.size(),
            "rmse: estimate/truth shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < truth.size(); ++i)
      acc += (estimates_per_run[k][i] - truth[i]).squaredNorm();
    sq[k] = acc;
  }
  const double total = pairwise_sum(sq);
  return std::sqrt(total / (static_cast<double>(estimates_per_run.size()) *
                            static_cast<double>(truth.size())));
}

bool localizability_check(const Scenario& scenario, int trials,
                          std::uint64_t seed) {
  require(trials >= 5, "localizability_check: trials must be at least 5");
  scenario.validate();
  const MeasurementSet noiseless =
      synthesize_measurements(scenario, NoiseModel{0.0, 0});
  const NetworkProblem problem = make_network_problem(scenario, noiseless);
  const Vec truth = scenario.truth_stacked();

  for (int t = 0; t < trials; ++t) {
    ClorisOptions options;
    options.seed = stream_key(seed, {0x6c6f63, static_cast<uint64_t>(t)});
    const ClorisReport convex = solve_cloris(problem, options);
    const RefineReport polished = refine(convex.stacked, problem);
    if ((polished.x - truth).cwiseAbs().maxCoeff() > 1e-3) return false;
  }
  return true;
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::floris: return "floris";
    case Algorithm::floris_reduced: return "floris-reduced";
    case Algorithm::floris_refine: return "floris+refine";
    case Algorithm::cloris: return "cloris";
    case Algorithm::cloris_range_only: return "cloris-range-only";
    case Algorithm::cloris_single: return "cloris-single";
    case Algorithm::cloris_refine: return "cloris+refine";
  }
  throw std::invalid_argument("algorithm_name: unknown algorithm");
}

Algorithm algorithm_from_name(const std::string& name) {
  for (Algorithm a :
       {Algorithm::floris, Algorithm::floris_reduced, Algorithm::floris_refine,
        Algorithm::cloris, Algorithm::cloris_range_only,
        Algorithm::cloris_single, Algorithm::cloris_refine}) {
    if (algorithm_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

int default_worker_count() {
  if (const char* env = std::getenv("HYBRIDLOC_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

struct RunRecord {
  bool ok = false;
  double sq_err = 0.0;
  bool rank1 = false;
  bool has_rank1 = false;
  double iterations = 0.0;
  double ms = 0.0;
};

bool is_floris(Algorithm a) {
  return a == Algorithm::floris || a == Algorithm::floris_reduced ||
         a == Algorithm::floris_refine;
}

RunRecord solve_one(Algorithm algo, const Scenario& scenario,
                    const EdgeDraws& draws, const Vec& truth,
                    const McConfig& config, std::uint64_t cloris_seed) {
  RunRecord rec;
  const auto start = std::chrono::steady_clock::now();

  const bool all_range = algo == Algorithm::cloris_range_only;
  const MeasurementSet meas =
      measurements_from_draws(scenario, draws, all_range);

  if (is_floris(algo)) {
    const FlorisProblem problem = make_floris_problem(scenario, meas);
    const FlorisSolution sol =
        algo == Algorithm::floris_reduced
            ? solve_floris_reduced(problem, config.sdp_tol,
                                   config.sdp_max_iters)
            : solve_floris(problem, config.sdp_tol, config.sdp_max_iters);
    Vec x = sol.x_hat;
    double iters = sol.sdp.iterations;
    if (algo == Algorithm::floris_refine) {
      const NetworkProblem refinement = make_network_problem(scenario, meas);
      const RefineReport polished = refine(x, refinement);
      x = polished.x;
      iters += polished.evaluations;
    }
    rec.sq_err = (x - truth).squaredNorm();
    rec.rank1 = sol.rank1 >= config.rank1_threshold;
    rec.has_rank1 = true;
    rec.iterations = iters;
  } else {
    const NetworkProblem problem =
        algo == Algorithm::cloris_single
            ? make_network_problem_no_internode(scenario, meas)
            : make_network_problem(scenario, meas);
    ClorisOptions options;
    options.tol = config.cloris_tol;
    options.max_iters = config.cloris_max_iters;
    options.seed = cloris_seed;
    const ClorisReport report = solve_cloris(problem, options);
    Vec x = report.stacked;
    double iters = report.iterations;
    if (algo == Algorithm::cloris_refine) {
      const RefineReport polished = refine(x, problem);
      x = polished.x;
      iters += polished.evaluations;
    }
    rec.sq_err = (x - truth).squaredNorm();
    rec.iterations = iters;
  }

  rec.ms = std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
               .count();
  rec.ok = true;
  return rec;
}

}  // namespace

std::vector<McResult> run_monte_carlo(const McConfig& config) {
  require(config.runs >= 1, "run_monte_carlo: runs must be positive");
  require(!config.etas.empty(), "run_monte_carlo: no noise factors");
  require(!config.algorithms.empty(), "run_monte_carlo: no algorithms");
  for (double eta : config.etas)
    require(eta >= 0.0, "run_monte_carlo: eta must be nonnegative");

  const bool single_source = config.kind == ScenarioKind::single_source_random;
  for (Algorithm a : config.algorithms)
    require(!is_floris(a) || single_source,
            "run_monte_carlo: single-source algorithm on a cooperative "
            "scenario kind");

  std::optional<ScenarioLibrary> library;
  if (config.kind == ScenarioKind::cooperative_canned) {
    require(!config.scenario_dir.empty(),
            "run_monte_carlo: canned scenarios need scenario_dir");
    library.emplace(config.scenario_dir);
  }

  const size_t n_algo = config.algorithms.size();
  const size_t n_eta = config.etas.size();
  std::vector<std::vector<RunRecord>> records(n_algo * n_eta);
  for (auto& r : records) r.resize(config.runs);

  std::atomic<int> next_run{0};
  std::atomic<int> node_count{single_source ? 1 : 0};
  auto worker = [&]() {
    for (;;) {
      const int run = next_run.fetch_add(1);
      if (run >= config.runs) return;
      Scenario scenario;
      try {
        scenario = generate_scenario(
            config.kind, config.dim, config.counts,
            single_source
                ? stream_key(config.seed, {0x72756e, static_cast<uint64_t>(run)})
                : static_cast<std::uint64_t>(run),
            library ? &*library : nullptr);
      } catch (const std::exception&) {
        continue;  // scenario failure poisons every cell of this run
      }
      node_count.store(static_cast<int>(scenario.nodes.size()));
      const Vec truth = scenario.truth_stacked();
      const std::uint64_t noise_key =
          stream_key(config.seed, {0x6d63, static_cast<uint64_t>(run), 1});
      const std::uint64_t init_key =
          stream_key(config.seed, {0x6d63, static_cast<uint64_t>(run), 2});
      for (size_t ei = 0; ei < n_eta; ++ei) {
        const EdgeDraws draws =
            draw_edge_noise(scenario, NoiseModel{config.etas[ei], noise_key});
        for (size_t ai = 0; ai < n_algo; ++ai) {
          try {
            records[ai * n_eta + ei][run] =
                solve_one(config.algorithms[ai], scenario, draws, truth,
                          config, init_key);
          } catch (const std::exception&) {
            // recorded as a failure; counted below
          }
        }
      }
    }
  };

  const int n_workers =
      std::max(1, std::min(config.threads > 0 ? config.threads
                                              : default_worker_count(),
                           config.runs));
  {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<McResult> results;
  for (size_t ai = 0; ai < n_algo; ++ai) {
    for (size_t ei = 0; ei < n_eta; ++ei) {
      const auto& cell = records[ai * n_eta + ei];
      McResult res;
      res.eta = config.etas[ei];
      res.algorithm = algorithm_name(config.algorithms[ai]);
      res.runs = config.runs;

      std::vector<double> sq, iters, ms;
      int rank1_count = 0, ok = 0;
      bool has_rank1 = false;
      for (const auto& rec : cell) {
        if (!rec.ok) continue;
        ++ok;
        sq.push_back(rec.sq_err);
        iters.push_back(rec.iterations);
        ms.push_back(rec.ms);
        if (rec.has_rank1) {
          has_rank1 = true;
          if (rec.rank1) ++rank1_count;
        }
      }
      res.failures = config.runs - ok;
      if (res.failures > config.runs / 100)
        throw NumericalError(
            "run_monte_carlo: " + std::to_string(res.failures) + "/" +
            std::to_string(config.runs) + " runs failed for " +
            res.algorithm + " at eta=" + std::to_string(res.eta));
      const int nodes = std::max(1, node_count.load());
      res.rmse = std::sqrt(pairwise_sum(sq) /
                           (static_cast<double>(ok) * nodes));
      res.mean_iterations = pairwise_sum(iters) / static_cast<double>(ok);
      res.mean_runtime_ms = pairwise_sum(ms) / static_cast<double>(ok);
      if (has_rank1)
        res.rank1_fraction =
            static_cast<double>(rank1_count) / static_cast<double>(ok);
      results.push_back(std::move(res));
    }
  }
  return results;
}

}  // namespace hybridloc

// hybridloc command line: scenario simulation, one-shot solves,
// self-calibration and Monte Carlo benchmark suites.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "hybridloc/calib.hpp"
#include "hybridloc/cloris.hpp"
#include "hybridloc/floris.hpp"
#include "hybridloc/montecarlo.hpp"
#include "hybridloc/refine.hpp"
#include "hybridloc/simulate.hpp"

using namespace hybridloc;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

json vec_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

struct SimulateArgs {
  std::string kind = "single-source";
  int dim = 2;
  int range_anchors = 8;
  int visual_anchors = 4;
  int sensors = 4;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string meas_out;
  int localizable_trials = 0;
};

int cmd_simulate(const SimulateArgs& args) {
  ScenarioCounts counts{args.range_anchors, args.visual_anchors, args.sensors};
  Scenario scenario;
  if (args.kind == "single-source") {
    scenario = generate_single_source(args.dim, counts, args.seed);
  } else if (args.kind == "cooperative") {
    scenario = generate_cooperative(args.dim, counts, args.seed);
  } else {
    throw std::invalid_argument("simulate: unknown kind '" + args.kind + "'");
  }

  if (args.localizable_trials > 0 &&
      !localizability_check(scenario, args.localizable_trials, args.seed))
    throw NumericalError("simulate: generated scenario failed the "
                         "localizability check; try another seed");

  const MeasurementSet meas =
      synthesize_measurements(scenario, NoiseModel{args.eta, args.seed});

  save_scenario(args.out, scenario);
  std::string meas_path = args.meas_out;
  if (meas_path.empty()) {
    std::filesystem::path p(args.out);
    p.replace_extension(".meas.json");
    meas_path = p.string();
  }
  save_measurements(meas_path, scenario, meas, args.eta, args.seed);

  std::cout << "wrote " << args.out << " (" << scenario.anchors.size()
            << " anchors, " << scenario.nodes.size() << " nodes, "
            << scenario.edges.size() << " edges) and " << meas_path << " ("
            << meas.ranges.size() << " ranges, " << meas.bearings.size()
            << " bearings, eta=" << args.eta << ")\n";
  return kExitOk;
}

struct SolveArgs {
  std::string algo = "floris";
  std::string in;
  std::string out;
  double tol = -1.0;
  int max_iters = -1;
  bool chain_refine = false;
  std::uint64_t seed = 0;
};

int cmd_solve(const SolveArgs& args) {
  const MeasurementFile file = load_measurements(args.in);
  const Scenario& scenario = file.scenario;
  const Vec truth = scenario.truth_stacked();

  json report;
  report["algorithm"] = args.algo;
  report["input"] = args.in;

  Vec estimate;
  if (args.algo == "floris" || args.algo == "floris-reduced") {
    if (scenario.nodes.size() != 1)
      throw std::invalid_argument(
          "solve: " + args.algo + " handles single-source inputs only");
    const FlorisProblem problem =
        make_floris_problem(scenario, file.measurements);
    const double tol = args.tol > 0 ? args.tol : 1e-7;
    const int iters = args.max_iters > 0 ? args.max_iters : 100000;
    const FlorisSolution sol = args.algo == "floris"
                                   ? solve_floris(problem, tol, iters)
                                   : solve_floris_reduced(problem, tol, iters);
    estimate = sol.x_hat;
    report["rank1_ratio"] = std::isinf(sol.rank1) ? -1.0 : sol.rank1;
    report["sdp_objective"] = sol.sdp.objective;
    report["sdp_iterations"] = sol.sdp.iterations;
    report["sdp_primal_residual"] = sol.sdp.primal_residual;
    report["sdp_dual_residual"] = sol.sdp.dual_residual;
    if (sol.reduced_fallback) {
      report["reduced_fallback"] = true;
      std::cerr << "warning: eliminated block was singular, fell back to "
                   "the full solve\n";
    }
    std::cout << "x_hat = [" << sol.x_hat.transpose() << "], rank1_ratio = "
              << sol.rank1 << ", sdp_iterations = " << sol.sdp.iterations
              << "\n";
  } else if (args.algo == "cloris" || args.algo == "refine") {
    const NetworkProblem problem =
        make_network_problem(scenario, file.measurements);
    Vec start;
    if (args.algo == "cloris") {
      ClorisOptions options;
      if (args.tol > 0) options.tol = args.tol;
      if (args.max_iters > 0) options.max_iters = args.max_iters;
      options.seed = args.seed;
      const ClorisReport sol = solve_cloris(problem, options);
      start = sol.stacked;
      report["iterations"] = sol.iterations;
      report["final_grad_norm"] = sol.final_grad_norm;
      report["relaxed_cost"] = sol.relaxed_cost_value;
      report["converged"] = sol.converged;
      std::cout << "cloris: " << sol.iterations
                << " iterations, final gradient norm " << sol.final_grad_norm
                << "\n";
    } else {
      // Standalone refinement starts from the anchor-box center.
      const auto [lo, hi] = problem.anchor_bounding_box();
      start.resize(problem.num_nodes() * problem.n);
      for (int i = 0; i < problem.num_nodes(); ++i)
        start.segment(i * problem.n, problem.n) = 0.5 * (lo + hi);
    }
    estimate = start;
    if (args.algo == "refine" || args.chain_refine) {
      const double before = hybrid_cost_network(estimate, problem);
      const RefineReport refined = refine(estimate, problem);
      estimate = refined.x;
      report["refine_evaluations"] = refined.evaluations;
      report["cost_before_refine"] = before;
      report["cost_after_refine"] = refined.cost;
      std::cout << "refine: cost " << before << " -> " << refined.cost
                << " in " << refined.evaluations << " evaluations\n";
    }
  } else {
    throw std::invalid_argument("solve: unknown algorithm '" + args.algo +
                                "'");
  }

  if (args.chain_refine &&
      (args.algo == "floris" || args.algo == "floris-reduced")) {
    const NetworkProblem problem =
        make_network_problem(scenario, file.measurements);
    const double before = hybrid_cost_network(estimate, problem);
    const RefineReport refined = refine(estimate, problem);
    estimate = refined.x;
    report["refine_evaluations"] = refined.evaluations;
    report["cost_before_refine"] = before;
    report["cost_after_refine"] = refined.cost;
    std::cout << "refine: cost " << before << " -> " << refined.cost << " in "
              << refined.evaluations << " evaluations\n";
  }

  json positions;
  for (size_t i = 0; i < scenario.nodes.size(); ++i)
    positions[scenario.nodes[i].id] = vec_json(
        estimate.segment(static_cast<int>(i) * scenario.dim, scenario.dim));
  report["positions"] = positions;

  const double err = std::sqrt((estimate - truth).squaredNorm() /
                               static_cast<double>(scenario.nodes.size()));
  report["rmse_vs_truth"] = err;
  std::cout << "rmse vs ground truth: " << err << "\n";

  if (!args.out.empty()) {
    std::ofstream out(args.out);
    if (!out) throw IoError("cannot write report file: " + args.out);
    out << report.dump(2) << "\n";
  }
  return kExitOk;
}

struct BenchArgs {
  std::string suite;
  int runs = 1000;
  std::uint64_t seed = 1;
  std::string out = "bench.csv";
  std::string scenario_dir = "scenarios";
  int threads = 0;
  std::vector<double> etas;
};

void write_csv(const std::string& path, const std::string& suite,
               std::uint64_t seed, int runs,
               const std::vector<std::pair<int, McResult>>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write csv file: " + path);
  out << "# hybridloc-bench-csv v1\n";
  out << "suite,dim,eta,algorithm,rmse,rank1_frac,mean_iters,"
         "mean_runtime_ms,runs,seed\n";
  out.precision(10);
  for (const auto& [dim, r] : rows) {
    out << suite << "," << dim << "," << r.eta << "," << r.algorithm << ","
        << r.rmse << ",";
    if (r.rank1_fraction >= 0.0) out << r.rank1_fraction;
    out << "," << r.mean_iterations << "," << r.mean_runtime_ms << ","
        << runs << "," << seed << "\n";
  }
}

void write_gnuplot(const std::string& csv_path) {
  std::filesystem::path script(csv_path);
  script.replace_extension(".gnuplot");
  std::ofstream out(script);
  if (!out) throw IoError("cannot write plot script: " + script.string());
  out << "set datafile separator ','\n"
      << "set logscale xy\n"
      << "set xlabel 'noise factor'\n"
      << "set ylabel 'RMSE'\n"
      << "set key left top\n"
      << "plot '" << std::filesystem::path(csv_path).filename().string()
      << "' every ::1 using 3:5 with linespoints title 'rmse'\n";
}

int cmd_bench(const BenchArgs& args) {
  const std::vector<std::string> suites = {"table4-2d", "table4-3d",
                                           "rank1-table", "anchors-sweep-3d",
                                           "single-vs-coop"};
  if (std::find(suites.begin(), suites.end(), args.suite) == suites.end()) {
    std::string known;
    for (const auto& s : suites) known += " " + s;
    throw std::invalid_argument("bench: unknown suite '" + args.suite +
                                "'; available:" + known);
  }

  std::vector<std::pair<int, McResult>> rows;
  McConfig base;
  base.runs = args.runs;
  base.seed = args.seed;
  base.threads = args.threads;
  base.scenario_dir = args.scenario_dir;

  if (args.suite == "table4-2d" || args.suite == "table4-3d") {
    McConfig config = base;
    config.kind = ScenarioKind::single_source_random;
    config.dim = args.suite == "table4-2d" ? 2 : 3;
    config.counts = {8, 4, 1};
    config.algorithms = {Algorithm::floris, Algorithm::cloris};
    config.etas = args.etas.empty()
                      ? std::vector<double>{0.001, 0.005, 0.01, 0.05, 0.1, 0.2}
                      : args.etas;
    for (const auto& r : run_monte_carlo(config))
      rows.emplace_back(config.dim, r);
  } else if (args.suite == "rank1-table") {
    for (int dim : {2, 3}) {
      McConfig config = base;
      config.kind = ScenarioKind::single_source_random;
      config.dim = dim;
      config.counts = {8, 4, 1};
      config.algorithms = {Algorithm::floris};
      config.etas = args.etas.empty()
                        ? std::vector<double>{0.001, 0.005, 0.01, 0.05, 0.1,
                                              0.2, 0.3, 0.4}
                        : args.etas;
      for (const auto& r : run_monte_carlo(config)) rows.emplace_back(dim, r);
    }
  } else if (args.suite == "anchors-sweep-3d") {
    const ScenarioLibrary library(args.scenario_dir);
    for (int anchors = 4; anchors <= 13; ++anchors) {
      McConfig config = base;
      config.kind = ScenarioKind::cooperative_canned;
      config.dim = 3;
      config.counts = {anchors - 1, 1, 4};
      config.algorithms = {Algorithm::cloris, Algorithm::cloris_range_only};
      config.etas = args.etas.empty() ? std::vector<double>{0.2} : args.etas;
      for (auto r : run_monte_carlo(config)) {
        r.algorithm += "[anchors=" + std::to_string(anchors) + "]";
        rows.emplace_back(3, r);
      }
    }
  } else {  // single-vs-coop
    McConfig config = base;
    config.kind = ScenarioKind::cooperative_canned;
    config.dim = 3;
    config.counts = {8, 5, 4};
    config.algorithms = {Algorithm::cloris, Algorithm::cloris_single};
    config.etas = args.etas.empty()
                      ? std::vector<double>{0.001, 0.005, 0.01, 0.05, 0.1, 0.2}
                      : args.etas;
    for (const auto& r : run_monte_carlo(config)) rows.emplace_back(3, r);
  }

  write_csv(args.out, args.suite, args.seed, args.runs, rows);
  write_gnuplot(args.out);
  std::cout << "wrote " << rows.size() << " rows to " << args.out << "\n";
  return kExitOk;
}

struct CalibrateArgs {
  std::string in;
  std::string out;
  double eps_tol = 1e-9;
  int max_iters = 500;
};

int cmd_calibrate(const CalibrateArgs& args) {
  const std::vector<PoseSample> samples = load_pose_samples(args.in);
  const CalibrationResult result =
      calibrate(samples, args.eps_tol, args.max_iters);

  json doc;
  doc["R_g_v"] = {{result.R_g_v(0, 0), result.R_g_v(0, 1), result.R_g_v(0, 2)},
                  {result.R_g_v(1, 0), result.R_g_v(1, 1), result.R_g_v(1, 2)},
                  {result.R_g_v(2, 0), result.R_g_v(2, 1), result.R_g_v(2, 2)}};
  doc["t_g_v"] = {result.t_g_v[0], result.t_g_v[1], result.t_g_v[2]};
  doc["t_0"] = {result.t_0[0], result.t_0[1], result.t_0[2]};
  doc["residual_rms"] = result.residual_rms;
  doc["iterations"] = result.iterations;
  doc["converged"] = result.converged;

  if (!args.out.empty()) {
    std::ofstream out(args.out);
    if (!out) throw IoError("cannot write result file: " + args.out);
    out << doc.dump(2) << "\n";
  }
  std::cout << "calibrated from " << samples.size() << " samples in "
            << result.iterations << " iterations, residual rms "
            << result.residual_rms << "\n";
  if (!result.converged)
    std::cerr << "warning: rotation change still above tolerance at the "
                 "iteration cap\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid range/bearing localization toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate", "generate a scenario and synthesize measurements");
  simulate->add_option("--kind", sim.kind,
                       "single-source | cooperative")->capture_default_str();
  simulate->add_option("--dim", sim.dim, "space dimension")
      ->capture_default_str();
  simulate->add_option("--range-anchors", sim.range_anchors,
                       "number of range anchors")->capture_default_str();
  simulate->add_option("--visual-anchors", sim.visual_anchors,
                       "number of bearing anchors")->capture_default_str();
  simulate->add_option("--sensors", sim.sensors,
                       "unknown nodes (cooperative kind)")
      ->capture_default_str();
  simulate->add_option("--eta", sim.eta, "noise factor")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "random seed")
      ->capture_default_str();
  simulate->add_option("--out", sim.out, "scenario output path")->required();
  simulate->add_option("--meas-out", sim.meas_out,
                       "measurement output path (default: <out>.meas.json)");
  simulate->add_option("--localizable-check", sim.localizable_trials,
                       "verify localizability with this many random starts");

  SolveArgs sol;
  auto* solve_cmd =
      app.add_subcommand("solve", "solve a measurement file");
  solve_cmd->add_option("--algo", sol.algo,
                        "floris | floris-reduced | cloris | refine")
      ->capture_default_str();
  solve_cmd->add_option("--in", sol.in, "measurement file")->required();
  solve_cmd->add_option("--out", sol.out, "report JSON path");
  solve_cmd->add_option("--tol", sol.tol, "solver tolerance override");
  solve_cmd->add_option("--max-iters", sol.max_iters,
                        "iteration cap override");
  solve_cmd->add_flag("--refine", sol.chain_refine,
                      "chain non-relaxed refinement after the solve");
  solve_cmd->add_option("--seed", sol.seed, "initialization seed (cloris)");

  BenchArgs bench;
  auto* bench_cmd =
      app.add_subcommand("bench", "run a Monte Carlo benchmark suite");
  bench_cmd->add_option("--suite", bench.suite,
                        "table4-2d | table4-3d | rank1-table | "
                        "anchors-sweep-3d | single-vs-coop")->required();
  bench_cmd->add_option("--runs", bench.runs, "Monte Carlo runs per cell")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "experiment seed")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "CSV output path")
      ->capture_default_str();
  bench_cmd->add_option("--scenario-dir", bench.scenario_dir,
                        "canned scenario directory")->capture_default_str();
  bench_cmd->add_option("--threads", bench.threads,
                        "worker cap (default HYBRIDLOC_THREADS)");
  bench_cmd->add_option("--etas", bench.etas,
                        "noise factors overriding the suite default");

  CalibrateArgs cal;
  auto* calib_cmd = app.add_subcommand(
      "calibrate", "estimate the visual-to-global transform from samples");
  calib_cmd->add_option("--in", cal.in, "pose sample JSON file")->required();
  calib_cmd->add_option("--out", cal.out, "result JSON path");
  calib_cmd->add_option("--eps-tol", cal.eps_tol,
                        "rotation-change stopping tolerance")
      ->capture_default_str();
  calib_cmd->add_option("--max-iters", cal.max_iters, "iteration cap")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
    if (simulate->parsed()) return cmd_simulate(sim);
    if (solve_cmd->parsed()) return cmd_solve(sol);
    if (bench_cmd->parsed()) return cmd_bench(bench);
    if (calib_cmd->parsed()) return cmd_calibrate(cal);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const DegenerateGeometryError& e) {
    std::cerr << "degenerate geometry: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

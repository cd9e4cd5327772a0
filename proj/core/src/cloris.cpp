#include "hybridloc/cloris.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hybridloc/random.hpp"

namespace hybridloc {

double relaxed_cost(const Vec& x, const NetworkProblem& problem) {
  const int n = problem.n;
  require(x.size() == problem.num_nodes() * n,
          "relaxed_cost: stacked position size mismatch");
  double cost = 0.0;
  for (const auto& e : problem.range_edges)
    cost += dist2_ball(x.segment(e.i * n, n) - x.segment(e.j * n, n), e.d);
  for (const auto& e : problem.bearing_edges)
    cost += dist2_line(x.segment(e.i * n, n) - x.segment(e.j * n, n), e.u);
  for (const auto& a : problem.anchor_ranges)
    cost += dist2_ball(x.segment(a.node * n, n) - a.anchor, a.d);
  for (const auto& a : problem.anchor_bearings)
    cost += dist2_line(x.segment(a.node * n, n) - a.anchor, a.u);
  return 0.5 * cost;
}

Vec relaxed_gradient(const Vec& x, const NetworkProblem& problem) {
  const int n = problem.n;
  require(x.size() == problem.num_nodes() * n,
          "relaxed_gradient: stacked position size mismatch");
  Vec grad = Vec::Zero(x.size());
  for (const auto& e : problem.range_edges) {
    const Vec z = x.segment(e.i * n, n) - x.segment(e.j * n, n);
    const Vec g = z - project_ball(z, e.d);
    grad.segment(e.i * n, n) += g;
    grad.segment(e.j * n, n) -= g;
  }
  for (const auto& e : problem.bearing_edges) {
    const Vec z = x.segment(e.i * n, n) - x.segment(e.j * n, n);
    const Vec g = z - project_line(z, e.u);
    grad.segment(e.i * n, n) += g;
    grad.segment(e.j * n, n) -= g;
  }
  for (const auto& a : problem.anchor_ranges) {
    const Vec z = x.segment(a.node * n, n) - a.anchor;
    grad.segment(a.node * n, n) += z - project_ball(z, a.d);
  }
  for (const auto& a : problem.anchor_bearings) {
    const Vec z = x.segment(a.node * n, n) - a.anchor;
    grad.segment(a.node * n, n) += z - project_line(z, a.u);
  }
  return grad;
}

Vec gradient_g(int node, const std::vector<Vec>& w,
               const NetworkProblem& problem) {
  require(static_cast<int>(w.size()) == problem.num_nodes(),
          "gradient_g: snapshot size mismatch");
  Vec grad = Vec::Zero(problem.n);
  for (const auto& e : problem.range_edges) {
    if (e.i != node && e.j != node) continue;
    const int other = e.i == node ? e.j : e.i;
    const Vec z = w[node] - w[other];
    grad += z - project_ball(z, e.d);
  }
  for (const auto& e : problem.bearing_edges) {
    if (e.i != node && e.j != node) continue;
    const int other = e.i == node ? e.j : e.i;
    const Vec z = w[node] - w[other];
    grad += z - project_line(z, e.u);
  }
  return grad;
}

Vec gradient_h(int node, const Vec& wi, const NetworkProblem& problem) {
  Vec grad = Vec::Zero(problem.n);
  for (const auto& a : problem.anchor_ranges) {
    if (a.node != node) continue;
    const Vec z = wi - a.anchor;
    grad += z - project_ball(z, a.d);
  }
  for (const auto& a : problem.anchor_bearings) {
    if (a.node != node) continue;
    const Vec z = wi - a.anchor;
    grad += z - project_line(z, a.u);
  }
  return grad;
}

double lipschitz_bound(const NetworkProblem& problem) {
  problem.validate();
  std::vector<int> degree(problem.num_nodes(), 0);
  std::vector<int> anchors(problem.num_nodes(), 0);
  for (const auto& e : problem.range_edges) {
    ++degree[e.i];
    ++degree[e.j];
  }
  for (const auto& e : problem.bearing_edges) {
    ++degree[e.i];
    ++degree[e.j];
  }
  for (const auto& a : problem.anchor_ranges) ++anchors[a.node];
  for (const auto& a : problem.anchor_bearings) ++anchors[a.node];

  const int delta_max = *std::max_element(degree.begin(), degree.end());
  const int anchor_max = *std::max_element(anchors.begin(), anchors.end());
  const double bound = 2.0 * delta_max + anchor_max;
  require(bound > 0.0, "lipschitz_bound: problem has no measurements");
  return bound;
}

ClorisState cloris_init(const NetworkProblem& problem, std::uint64_t seed) {
  problem.validate();
  const auto [lo, hi] = problem.anchor_bounding_box();
  RandomStream rng(stream_key(seed, {0x696e6974}));  // "init"

  ClorisState state;
  state.x_prev.resize(problem.num_nodes() * problem.n);
  for (int i = 0; i < problem.num_nodes(); ++i)
    for (int c = 0; c < problem.n; ++c)
      state.x_prev[i * problem.n + c] = rng.next_uniform(lo[c], hi[c]);
  state.x_prev2 = state.x_prev;
  state.k = 0;
  state.lipschitz = lipschitz_bound(problem);
  return state;
}

ClorisStepInfo cloris_step(ClorisState& state, const NetworkProblem& problem) {
  const int n = problem.n;
  state.k += 1;
  const double coef =
      static_cast<double>(state.k - 2) / static_cast<double>(state.k + 1);

  const Vec w = state.x_prev + coef * (state.x_prev - state.x_prev2);
  const Vec grad = relaxed_gradient(w, problem);

  ClorisStepInfo info;
  for (int i = 0; i < problem.num_nodes(); ++i)
    info.max_node_grad_norm =
        std::max(info.max_node_grad_norm, grad.segment(i * n, n).norm());

  state.x_prev2 = state.x_prev;
  state.x_prev = w - grad / state.lipschitz;
  return info;
}

ClorisReport solve_cloris(const NetworkProblem& problem,
                          const ClorisOptions& options) {
  require(options.tol > 0.0, "solve_cloris: tol must be positive");
  require(options.max_iters >= 1, "solve_cloris: max_iters must be positive");
  const auto start = std::chrono::steady_clock::now();

  ClorisState state = cloris_init(problem, options.seed);

  ClorisReport report;
  report.unidentifiable = problem.isolated_nodes();
  if (options.record_cost) report.cost_history.reserve(1024);

  double grad_norm = std::numeric_limits<double>::infinity();
  int iters = 0;
  while (iters < options.max_iters) {
    const ClorisStepInfo info = cloris_step(state, problem);
    ++iters;
    grad_norm = info.max_node_grad_norm;
    if (options.record_cost)
      report.cost_history.push_back(relaxed_cost(state.x_prev, problem));
    if (grad_norm <= options.tol) break;
  }

  report.stacked = state.x_prev;
  report.iterations = iters;
  report.final_grad_norm = grad_norm;
  report.converged = grad_norm <= options.tol;
  report.relaxed_cost_value = relaxed_cost(state.x_prev, problem);
  for (int i = 0; i < problem.num_nodes(); ++i)
    report.positions[problem.node_ids[i]] =
        state.x_prev.segment(i * problem.n, problem.n);
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return report;
}

Bearing internode_bearing_from_poses(const RelativePose& i_to_j,
                                     const std::vector<RelativePose>& chain,
                                     const CalibrationResult& calib) {
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  for (const auto& pose : chain) {
    const Eigen::Matrix3d gram = pose.rotation.transpose() * pose.rotation;
    if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6)
      throw NoBearingAvailableError(
          "internode_bearing_from_poses: broken pose chain");
    orientation = orientation * pose.rotation;
  }
  const Eigen::Vector3d local = i_to_j.translation;
  if (local.norm() < 1e-12)
    throw NoBearingAvailableError(
        "internode_bearing_from_poses: zero relative translation");
  return bearing_to_global(calib, orientation * local);
}

}  // namespace hybridloc

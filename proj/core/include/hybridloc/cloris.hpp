#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "hybridloc/calib.hpp"
#include "hybridloc/network.hpp"

namespace hybridloc {

/// Convex surrogate of the hybrid network cost: sphere sets replaced by
/// balls, line terms kept, every squared distance halved. `x` stacks
/// node positions in node_ids order.
double relaxed_cost(const Vec& x, const NetworkProblem& problem);

/// Full gradient of relaxed_cost, one segment per node.
Vec relaxed_gradient(const Vec& x, const NetworkProblem& problem);

/// Internode part of the per-node gradient, evaluated on a snapshot of
/// all node iterates.
Vec gradient_g(int node, const std::vector<Vec>& w,
               const NetworkProblem& problem);

/// Anchor part of the per-node gradient.
Vec gradient_h(int node, const Vec& wi, const NetworkProblem& problem);

/// Upper bound on the Lipschitz constant of the relaxed gradient:
/// twice the maximum node degree plus the maximum anchor count.
double lipschitz_bound(const NetworkProblem& problem);

struct ClorisState {
  Vec x_prev;   // iterate k-1, stacked
  Vec x_prev2;  // iterate k-2, stacked
  int k = 0;
  double lipschitz = 1.0;
};

struct ClorisStepInfo {
  double max_node_grad_norm = 0.0;
};

/// Initialize node iterates uniformly inside the anchor bounding box;
/// both history slots start equal so the first extrapolation is null.
ClorisState cloris_init(const NetworkProblem& problem, std::uint64_t seed);

/// One accelerated iteration: momentum extrapolation with coefficient
/// (k-2)/(k+1) followed by a gradient step of length 1/L. Node updates
/// read one shared snapshot.
ClorisStepInfo cloris_step(ClorisState& state, const NetworkProblem& problem);

struct ClorisOptions {
  double tol = 1e-6;      // threshold on the max per-node gradient norm
  int max_iters = 50000;
  std::uint64_t seed = 0;
  bool record_cost = false;  // keep relaxed cost per iteration
};

struct ClorisReport {
  std::map<NodeId, Vec> positions;
  Vec stacked;
  int iterations = 0;
  double final_grad_norm = 0.0;
  double relaxed_cost_value = 0.0;
  bool converged = false;
  std::vector<int> unidentifiable;  // node indices with no measurements
  double wall_ms = 0.0;
  std::vector<double> cost_history;
};

ClorisReport solve_cloris(const NetworkProblem& problem,
                          const ClorisOptions& options = {});

/// Relative rigid transform between two local frames.
struct RelativePose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// Global-frame bearing between two nodes from pairwise poses: the chain
/// of relative poses from a calibrated visual anchor down to the
/// observing node orients its local frame, and the observed i-to-j
/// translation direction is rotated into the global frame.
Bearing internode_bearing_from_poses(const RelativePose& i_to_j,
                                     const std::vector<RelativePose>& chain,
                                     const CalibrationResult& calib);

}  // namespace hybridloc

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <utility>

#include "hybridloc/network.hpp"

namespace hybridloc {

enum class RefineMethod { simplex, gradient };
enum class CostKind { hybrid_ls, huang_ml };

struct RefineConfig {
  RefineMethod method = RefineMethod::simplex;
  int max_evals = 20000;
  double x_tol = 1e-9;
  double f_tol = 1e-12;
  CostKind cost_kind = CostKind::hybrid_ls;
};

/// Empirical per-term noise variances for the maximum-likelihood cost,
/// keyed by (observer, target) measurement pair.
struct HuangVariances {
  std::map<std::pair<NodeId, NodeId>, double> range;      // sigma^2_r
  std::map<std::pair<NodeId, NodeId>, double> azimuth;    // sigma^2_phi
  std::map<std::pair<NodeId, NodeId>, double> elevation;  // sigma^2_alpha
};

struct RefineReport {
  Vec x;
  double cost = 0.0;
  double initial_cost = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Azimuth/elevation pair of a 3D direction: atan2 over the first two
/// coordinates, acos of the (normalized) third.
std::pair<double, double> azimuth_elevation(const Vec& direction);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

/// Weighted maximum-likelihood cost over ranges, azimuths and
/// elevations (3D only). Range terms come from range edges, angular
/// terms from bearing edges; measured angles derive from the stored
/// unit bearings. Throws when an elevation term hits a zero baseline.
double huang_cost(const Vec& x, const NetworkProblem& problem,
                  const HuangVariances& variances);

/// Sample per-term variances of range/azimuth/elevation residuals under
/// the multiplicative-noise model at the true geometry. Zero variances
/// are floored at 1e-12.
HuangVariances estimate_variances(const NetworkProblem& truth_problem,
                                  const Vec& truth, double eta, int trials,
                                  std::uint64_t seed = 0);

/// Local minimization of the selected nonconvex cost starting from x0.
/// Never returns a point with higher cost than the start.
RefineReport refine(const Vec& x0, const NetworkProblem& problem,
                    const RefineConfig& config = {},
                    const HuangVariances* variances = nullptr);

/// Derivative-free Nelder-Mead simplex minimizer (reflection 1,
/// expansion 2, contraction 0.5, shrink 0.5; one restart on stagnation).
RefineReport nelder_mead(const std::function<double(const Vec&)>& f,
                         const Vec& x0, int max_evals, double x_tol,
                         double f_tol);

}  // namespace hybridloc

#pragma once

#include <utility>
#include <vector>

#include "hybridloc/common.hpp"

namespace hybridloc {

/// Dense SDP over one symmetric PSD matrix variable W:
///
///   minimize    tr(cost * W)
///   subject to  tr(A_l * W) = b_l          for every equality constraint
///               W[r, c] >= 0               for every flagged entry
///               W PSD
///
/// Intended problem class: sides up to ~60, a handful of constraints.
struct SdpProblem {
  int dim = 0;
  Mat cost;
  std::vector<std::pair<Mat, double>> eq_constraints;
  std::vector<std::pair<int, int>> nonneg_entries;

  void validate() const;
};

enum class SdpStatus { converged, max_iters, infeasible_suspected };

struct SdpSolution {
  Mat W;
  double objective = 0.0;
  double primal_residual = 0.0;  // worst equality / nonneg-entry violation
  double dual_residual = 0.0;    // Frobenius change of the cone iterate
  int iterations = 0;
  SdpStatus status = SdpStatus::max_iters;
};

/// Operator-splitting solve: alternating projections between the affine
/// constraint set and the cone, with dual updates, unit step ratio and
/// over-relaxation 1.5. Deterministic for fixed inputs.
SdpSolution solve(const SdpProblem& problem, double tol = 1e-7,
                  int max_iters = 100000);

/// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.
/// Eigenvalues ascending; vectors as matching columns.
struct SymEig {
  Vec values;
  Mat vectors;
};
SymEig jacobi_eigensym(const Mat& S, double off_tol = 1e-12,
                       int max_sweeps = 60);

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clamped).
Mat project_psd(const Mat& S);

/// Ratio of the two largest singular values of a PSD matrix;
/// +infinity when the second is negligible.
double rank1_ratio(const Mat& W);

}  // namespace hybridloc

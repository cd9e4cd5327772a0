#pragma once

#include <map>
#include <utility>
#include <vector>

#include "hybridloc/geometry.hpp"
#include "hybridloc/sdp.hpp"

namespace hybridloc {

/// Single-source problem: anchors providing ranges precede anchors
/// providing bearings in the internal (canonical) ordering. Ids are
/// kept alongside so callers can map results back to their labels.
struct FlorisProblem {
  int n = 0;
  std::vector<std::pair<Vec, double>> range_anchors;    // (a_k, d_k)
  std::vector<std::pair<Vec, Bearing>> bearing_anchors;  // (a_j, u_j)
  std::vector<NodeId> range_ids;    // optional, parallel to range_anchors
  std::vector<NodeId> bearing_ids;  // optional, parallel to bearing_anchors

  int num_ranges() const { return static_cast<int>(range_anchors.size()); }
  int num_bearings() const { return static_cast<int>(bearing_anchors.size()); }
  int m() const { return num_ranges() + num_bearings(); }
  int p() const { return n * num_ranges() + num_bearings(); }

  void validate() const;
};

struct FlorisSolution {
  Vec x_hat;
  std::vector<Vec> theta;  // unit directions, one per range anchor
  std::vector<double> t;   // nonnegative scales, one per bearing anchor
  std::vector<Vec> y;      // closest points, canonical order
  Mat W;
  double rank1 = 0.0;
  SdpSolution sdp;
  bool reduced_fallback = false;  // reduced solve fell back to the full one
};

/// Stacked anchor vector in canonical order (ranges first), length m*n.
Vec stacked_anchors(const FlorisProblem& problem);

/// Block matrix mapping (theta, t) to closest-point offsets: scaled
/// identity blocks for range anchors followed by bearing columns.
Mat build_R(const FlorisProblem& problem);

/// Projector onto the orthogonal complement of ones(m) (x) I_n.
Mat build_J(int m, int n);

/// Symmetric cost matrix of the homogenized quadratic form in
/// (theta, t, 1).
Mat build_M(const FlorisProblem& problem);

/// The relaxed semidefinite program for the problem (rank constraint
/// dropped): trace-one theta blocks, nonnegative bearing scales against
/// the homogenizing entry, unit corner.
SdpProblem build_sdp(const FlorisProblem& problem);

/// Extract (theta, t) from a solved W: leading eigenvector scaled so the
/// homogenizing entry is +1, falling back to the rightmost column when
/// that entry is negligible. Thetas are renormalized and scales clamped
/// to be nonnegative.
std::pair<std::vector<Vec>, std::vector<double>> recover_from_W(
    const Mat& W, const FlorisProblem& problem);

FlorisSolution solve_floris(const FlorisProblem& problem,
                            double sdp_tol = 1e-7, int max_iters = 100000);

/// Reduced-complexity variant: the nonnegativity constraints on the
/// bearing scales are dropped, those variables are eliminated in closed
/// form, and a smaller SDP over the theta blocks is solved; the scales
/// are reconstructed afterwards. Falls back to the full solve when the
/// eliminated block is singular.
FlorisSolution solve_floris_reduced(const FlorisProblem& problem,
                                    double sdp_tol = 1e-7,
                                    int max_iters = 100000);

/// Build a single-source problem from id-keyed anchors and measurement
/// lists; bearings are reoriented anchor-to-source if needed.
FlorisProblem floris_from_measurements(
    const std::map<NodeId, Vec>& anchors, const NodeId& source,
    const std::vector<RangeMeasurement>& ranges,
    const std::vector<BearingMeasurement>& bearings);

}  // namespace hybridloc

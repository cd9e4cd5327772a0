#include "hybridloc/floris.hpp"

#include <cmath>
#include <cstdio>

namespace hybridloc {

void FlorisProblem::validate() const {
  require(n >= 2, "FlorisProblem: dimension must be at least 2");
  require(m() >= 1, "FlorisProblem: at least one anchor is required");
  for (const auto& [a, d] : range_anchors) {
    require(a.size() == n, "FlorisProblem: anchor dimension mismatch");
    require(all_finite(a), "FlorisProblem: anchor must be finite");
    require(std::isfinite(d) && d >= 0.0,
            "FlorisProblem: range must be nonnegative");
  }
  for (const auto& [a, u] : bearing_anchors) {
    require(a.size() == n, "FlorisProblem: anchor dimension mismatch");
    require(all_finite(a), "FlorisProblem: anchor must be finite");
    require(u.dim() == n, "FlorisProblem: bearing dimension mismatch");
  }
}

Vec stacked_anchors(const FlorisProblem& problem) {
  const int n = problem.n;
  Vec a(problem.m() * n);
  int row = 0;
  for (const auto& [pos, d] : problem.range_anchors) {
    a.segment(row, n) = pos;
    row += n;
  }
  for (const auto& [pos, u] : problem.bearing_anchors) {
    a.segment(row, n) = pos;
    row += n;
  }
  return a;
}

Mat build_R(const FlorisProblem& problem) {
  const int n = problem.n;
  const int nr = problem.num_ranges();
  Mat R = Mat::Zero(problem.m() * n, problem.p());
  for (int k = 0; k < nr; ++k) {
    R.block(k * n, k * n, n, n) =
        problem.range_anchors[k].second * Mat::Identity(n, n);
  }
  for (int j = 0; j < problem.num_bearings(); ++j) {
    R.block((nr + j) * n, nr * n + j, n, 1) =
        problem.bearing_anchors[j].second.direction();
  }
  return R;
}

Mat build_J(int m, int n) {
  require(m >= 1 && n >= 1, "build_J: sizes must be positive");
  Mat J = Mat::Identity(m * n, m * n);
  const double w = 1.0 / static_cast<double>(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      J.block(i * n, j * n, n, n) -= w * Mat::Identity(n, n);
  return J;
}

Mat build_M(const FlorisProblem& problem) {
  const Mat R = build_R(problem);
  const Mat J = build_J(problem.m(), problem.n);
  const Vec a = stacked_anchors(problem);
  const int p = problem.p();

  const Mat JR = J * R;
  const Vec Ja = J * a;

  Mat M(p + 1, p + 1);
  M.topLeftCorner(p, p).noalias() = R.transpose() * JR;
  M.topRightCorner(p, 1).noalias() = R.transpose() * Ja;
  M.bottomLeftCorner(1, p) = M.topRightCorner(p, 1).transpose();
  M(p, p) = a.dot(Ja);
  return 0.5 * (M + M.transpose());
}

SdpProblem build_sdp(const FlorisProblem& problem) {
  const int n = problem.n;
  const int nr = problem.num_ranges();
  const int p = problem.p();

  SdpProblem sdp;
  sdp.dim = p + 1;
  sdp.cost = build_M(problem);
  for (int k = 0; k < nr; ++k) {
    Mat A = Mat::Zero(p + 1, p + 1);
    A.block(k * n, k * n, n, n) = Mat::Identity(n, n);
    sdp.eq_constraints.emplace_back(std::move(A), 1.0);
  }
  Mat corner = Mat::Zero(p + 1, p + 1);
  corner(p, p) = 1.0;
  sdp.eq_constraints.emplace_back(std::move(corner), 1.0);
  for (int j = 0; j < problem.num_bearings(); ++j)
    sdp.nonneg_entries.emplace_back(nr * n + j, p);
  return sdp;
}

namespace {

// Leading eigenvector of W scaled so its last entry is +1; falls back to
// the rightmost column when that entry is negligible.
Vec homogeneous_factor(const Mat& W) {
  const int side = static_cast<int>(W.rows());
  const SymEig eig = jacobi_eigensym(W);
  Vec v = eig.vectors.col(side - 1);
  if (std::abs(v[side - 1]) < 1e-6) {
    v = W.col(side - 1);
    if (std::abs(v[side - 1]) < 1e-12) return Vec::Zero(side);
  }
  return v / v[side - 1];
}

std::pair<std::vector<Vec>, std::vector<double>> split_factor(
    const Vec& v, int n, int num_ranges, int num_bearings) {
  std::vector<Vec> theta(num_ranges);
  std::vector<double> t(num_bearings);
  for (int k = 0; k < num_ranges; ++k) {
    Vec block = v.segment(k * n, n);
    const double norm = block.norm();
    if (norm < 1e-12) {
      // Pinned anchor (zero range): any direction works, pick e1.
      block = Vec::Zero(n);
      block[0] = 1.0;
    } else {
      block /= norm;
    }
    theta[k] = block;
  }
  for (int j = 0; j < num_bearings; ++j)
    t[j] = std::max(v[num_ranges * n + j], 0.0);
  return {std::move(theta), std::move(t)};
}

FlorisSolution assemble_solution(const FlorisProblem& problem,
                                 std::vector<Vec> theta, std::vector<double> t,
                                 Mat W, SdpSolution sdp) {
  FlorisSolution out;
  out.theta = std::move(theta);
  out.t = std::move(t);
  out.W = std::move(W);
  out.sdp = std::move(sdp);
  out.rank1 = rank1_ratio(out.W);

  const int nr = problem.num_ranges();
  out.y.reserve(problem.m());
  for (int k = 0; k < nr; ++k)
    out.y.push_back(problem.range_anchors[k].first +
                    problem.range_anchors[k].second * out.theta[k]);
  for (int j = 0; j < problem.num_bearings(); ++j)
    out.y.push_back(problem.bearing_anchors[j].first +
                    out.t[j] * problem.bearing_anchors[j].second.direction());

  out.x_hat = Vec::Zero(problem.n);
  for (const Vec& yk : out.y) out.x_hat += yk;
  out.x_hat /= static_cast<double>(problem.m());
  return out;
}

void check_converged(const SdpSolution& sdp, const char* who) {
  if (sdp.status == SdpStatus::converged) return;
  const char* status = sdp.status == SdpStatus::max_iters
                           ? "iteration limit reached"
                           : "infeasibility suspected";
  char buf[128];
  std::snprintf(buf, sizeof(buf), " (%s, primal %.3e, dual %.3e)", status,
                sdp.primal_residual, sdp.dual_residual);
  throw NumericalError(std::string(who) + ": SDP did not converge" + buf);
}

}  // namespace

std::pair<std::vector<Vec>, std::vector<double>> recover_from_W(
    const Mat& W, const FlorisProblem& problem) {
  require(W.rows() == problem.p() + 1 && W.cols() == problem.p() + 1,
          "recover_from_W: matrix side does not match the problem");
  const Vec v = homogeneous_factor(W);
  return split_factor(v, problem.n, problem.num_ranges(),
                      problem.num_bearings());
}

FlorisSolution solve_floris(const FlorisProblem& problem, double sdp_tol,
                            int max_iters) {
  problem.validate();
  SdpSolution sdp = solve(build_sdp(problem), sdp_tol, max_iters);
  check_converged(sdp, "solve_floris");
  auto [theta, t] = recover_from_W(sdp.W, problem);
  Mat W = sdp.W;
  return assemble_solution(problem, std::move(theta), std::move(t),
                           std::move(W), std::move(sdp));
}

FlorisSolution solve_floris_reduced(const FlorisProblem& problem,
                                    double sdp_tol, int max_iters) {
  problem.validate();
  const int nt = problem.num_bearings();
  if (nt == 0) return solve_floris(problem, sdp_tol, max_iters);

  const int n = problem.n;
  const int nr = problem.num_ranges();
  const int p = problem.p();
  const int ptheta = n * nr;

  const Mat M = build_M(problem);
  const Mat Qtt = M.block(ptheta, ptheta, nt, nt);
  const Mat Qtheta_t = M.block(0, ptheta, ptheta, nt);
  const Vec q_theta = M.block(0, p, ptheta, 1);
  const Vec q_t = M.block(ptheta, p, nt, 1);
  const double corner = M(p, p);

  // Pseudo-inverse of the eliminated block; a singular block means the
  // scales are not determined by the thetas and we keep the full solve.
  const SymEig qe = jacobi_eigensym(Qtt);
  const double lam_max = std::max(qe.values[nt - 1], 0.0);
  if (lam_max <= 0.0 || qe.values[0] <= 1e-12 * lam_max) {
    FlorisSolution out = solve_floris(problem, sdp_tol, max_iters);
    out.reduced_fallback = true;
    return out;
  }
  Mat Qtt_inv = Mat::Zero(nt, nt);
  for (int k = 0; k < nt; ++k)
    Qtt_inv.noalias() += (1.0 / qe.values[k]) * qe.vectors.col(k) *
                         qe.vectors.col(k).transpose();

  Mat Mred(ptheta + 1, ptheta + 1);
  Mred.topLeftCorner(ptheta, ptheta) =
      M.topLeftCorner(ptheta, ptheta) -
      Qtheta_t * Qtt_inv * Qtheta_t.transpose();
  Mred.topRightCorner(ptheta, 1) = q_theta - Qtheta_t * Qtt_inv * q_t;
  Mred.bottomLeftCorner(1, ptheta) = Mred.topRightCorner(ptheta, 1).transpose();
  Mred(ptheta, ptheta) = corner - q_t.dot(Qtt_inv * q_t);
  Mred = 0.5 * (Mred + Mred.transpose());

  SdpProblem sdp_problem;
  sdp_problem.dim = ptheta + 1;
  sdp_problem.cost = std::move(Mred);
  for (int k = 0; k < nr; ++k) {
    Mat A = Mat::Zero(ptheta + 1, ptheta + 1);
    A.block(k * n, k * n, n, n) = Mat::Identity(n, n);
    sdp_problem.eq_constraints.emplace_back(std::move(A), 1.0);
  }
  Mat corner_con = Mat::Zero(ptheta + 1, ptheta + 1);
  corner_con(ptheta, ptheta) = 1.0;
  sdp_problem.eq_constraints.emplace_back(std::move(corner_con), 1.0);

  SdpSolution sdp = solve(sdp_problem, sdp_tol, max_iters);
  check_converged(sdp, "solve_floris_reduced");

  const Vec v = homogeneous_factor(sdp.W);
  auto [theta, t_unused] = split_factor(v, n, nr, 0);

  Vec theta_stack(ptheta);
  for (int k = 0; k < nr; ++k) theta_stack.segment(k * n, n) = theta[k];
  const Vec t_rec = -Qtt_inv * (Qtheta_t.transpose() * theta_stack + q_t);
  std::vector<double> t(nt);
  for (int j = 0; j < nt; ++j) t[j] = std::max(t_rec[j], 0.0);

  Mat W = sdp.W;
  return assemble_solution(problem, std::move(theta), std::move(t),
                           std::move(W), std::move(sdp));
}

FlorisProblem floris_from_measurements(
    const std::map<NodeId, Vec>& anchors, const NodeId& source,
    const std::vector<RangeMeasurement>& ranges,
    const std::vector<BearingMeasurement>& bearings) {
  require(!anchors.empty(), "floris_from_measurements: no anchors");
  FlorisProblem problem;
  problem.n = static_cast<int>(anchors.begin()->second.size());

  auto anchor_of = [&](const RangeMeasurement& m) -> NodeId {
    if (m.observer == source) return m.target;
    if (m.target == source) return m.observer;
    throw std::invalid_argument(
        "floris_from_measurements: measurement does not involve the source");
  };

  for (const auto& r : ranges) {
    const NodeId aid = anchor_of(r);
    auto it = anchors.find(aid);
    require(it != anchors.end(),
            "floris_from_measurements: unknown anchor '" + aid + "'");
    problem.range_anchors.emplace_back(it->second, r.distance);
    problem.range_ids.push_back(aid);
  }
  for (const auto& b : bearings) {
    NodeId aid;
    Bearing u = b.bearing;
    if (b.observer == source) {
      aid = b.target;
      u = u.flipped();  // store anchor-to-source
    } else if (b.target == source) {
      aid = b.observer;
    } else {
      throw std::invalid_argument(
          "floris_from_measurements: measurement does not involve the source");
    }
    auto it = anchors.find(aid);
    require(it != anchors.end(),
            "floris_from_measurements: unknown anchor '" + aid + "'");
    problem.bearing_anchors.emplace_back(it->second, u);
    problem.bearing_ids.push_back(aid);
  }
  problem.validate();
  return problem;
}

}  // namespace hybridloc

#include "hybridloc/sdp.hpp"

#include <Eigen/Jacobi>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hybridloc {

void SdpProblem::validate() const {
  require(dim >= 1, "SdpProblem: dim must be positive");
  require(cost.rows() == dim && cost.cols() == dim,
          "SdpProblem: cost matrix has wrong shape");
  require(all_finite(cost), "SdpProblem: cost matrix must be finite");
  const double cost_scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  require((cost - cost.transpose()).cwiseAbs().maxCoeff() <=
              1e-9 * cost_scale,
          "SdpProblem: cost matrix must be symmetric");
  for (const auto& [A, b] : eq_constraints) {
    require(A.rows() == dim && A.cols() == dim,
            "SdpProblem: constraint matrix has wrong shape");
    require(all_finite(A) && std::isfinite(b),
            "SdpProblem: constraint must be finite");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    require((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
            "SdpProblem: constraint matrix must be symmetric");
  }
  for (const auto& [r, c] : nonneg_entries) {
    require(r >= 0 && r < dim && c >= 0 && c < dim,
            "SdpProblem: nonneg entry index out of range");
  }
}

SymEig jacobi_eigensym(const Mat& S, double off_tol, int max_sweeps) {
  require(S.rows() == S.cols() && S.rows() >= 1,
          "jacobi_eigensym: matrix must be square");
  require(all_finite(S), "jacobi_eigensym: matrix must be finite");
  const int q = static_cast<int>(S.rows());

  Mat A = 0.5 * (S + S.transpose());
  Mat V = Mat::Identity(q, q);

  const double frob = A.norm();
  const double off_target = std::max(off_tol * frob, 1e-300);
  const double skip_tol = off_target / static_cast<double>(q);

  bool done = frob == 0.0 || q == 1;
  Eigen::JacobiRotation<double> rot;
  for (int sweep = 0; sweep < max_sweeps && !done; ++sweep) {
    for (int i = 0; i < q - 1; ++i) {
      for (int j = i + 1; j < q; ++j) {
        if (std::abs(A(i, j)) <= skip_tol) continue;
        rot.makeJacobi(A, i, j);
        A.applyOnTheLeft(i, j, rot.adjoint());
        A.applyOnTheRight(i, j, rot);
        V.applyOnTheRight(i, j, rot);
      }
    }
    // Summed directly: the subtraction trick |A|^2 - |diag|^2 cannot
    // resolve values this far below the matrix norm.
    double off2 = 0.0;
    for (int i = 0; i < q - 1; ++i)
      for (int j = i + 1; j < q; ++j) off2 += 2.0 * A(i, j) * A(i, j);
    done = off2 <= off_target * off_target;
  }
  if (!done)
    throw NumericalError("jacobi_eigensym: no convergence in " +
                         std::to_string(max_sweeps) + " sweeps");

  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return A(a, a) < A(b, b);
  });

  SymEig out;
  out.values.resize(q);
  out.vectors.resize(q, q);
  for (int k = 0; k < q; ++k) {
    out.values[k] = A(order[k], order[k]);
    out.vectors.col(k) = V.col(order[k]);
  }
  return out;
}

Mat project_psd(const Mat& S) {
  const SymEig eig = jacobi_eigensym(S);
  const int q = static_cast<int>(S.rows());
  Mat out = Mat::Zero(q, q);
  for (int k = 0; k < q; ++k) {
    if (eig.values[k] <= 0.0) continue;
    out.noalias() += eig.values[k] * eig.vectors.col(k) *
                     eig.vectors.col(k).transpose();
  }
  return 0.5 * (out + out.transpose());
}

double rank1_ratio(const Mat& W) {
  require(W.rows() == W.cols() && W.rows() >= 2,
          "rank1_ratio: matrix must be square with side >= 2");
  require(W.norm() > 0.0, "rank1_ratio: zero matrix");
  const SymEig eig = jacobi_eigensym(W);
  const int q = static_cast<int>(W.rows());
  const double s1 = std::max(eig.values[q - 1], 0.0);
  const double s2 = std::max(eig.values[q - 2], 0.0);
  require(s1 > 0.0, "rank1_ratio: matrix has no positive spectrum");
  if (s2 < 1e-14 * s1) return std::numeric_limits<double>::infinity();
  return s1 / s2;
}

namespace {

struct SolverData {
  int q = 0;
  int n_eq = 0;
  std::vector<Mat> eq_mats;
  Vec b;
  Mat gram_pinv;
  bool consistent = true;
  double inconsistency = 0.0;
  std::vector<std::pair<int, int>> nonneg;
  bool nonneg_in_affine = true;  // disjoint supports: clamp inside C1
};

// The affine prox handles the flagged entries by clamping only when no
// equality constraint touches them; otherwise a slack block in the cone
// carries the inequality.
SolverData prepare(const SdpProblem& problem) {
  SolverData data;
  data.q = problem.dim;
  data.n_eq = static_cast<int>(problem.eq_constraints.size());
  data.nonneg = problem.nonneg_entries;

  for (const auto& [A, b] : problem.eq_constraints) {
    data.eq_mats.push_back(0.5 * (A + A.transpose()));
    (void)b;
  }
  data.b.resize(data.n_eq);
  for (int l = 0; l < data.n_eq; ++l)
    data.b[l] = problem.eq_constraints[l].second;

  for (const auto& [r, c] : data.nonneg) {
    for (const Mat& A : data.eq_mats)
      if (A(r, c) != 0.0 || A(c, r) != 0.0) data.nonneg_in_affine = false;
  }

  if (data.n_eq > 0) {
    Mat gram(data.n_eq, data.n_eq);
    for (int l = 0; l < data.n_eq; ++l)
      for (int m = l; m < data.n_eq; ++m) {
        const double g =
            (data.eq_mats[l].array() * data.eq_mats[m].array()).sum();
        gram(l, m) = g;
        gram(m, l) = g;
      }
    const SymEig ge = jacobi_eigensym(gram);
    const double lam_max = std::max(ge.values[data.n_eq - 1], 0.0);
    data.gram_pinv = Mat::Zero(data.n_eq, data.n_eq);
    for (int k = 0; k < data.n_eq; ++k) {
      if (ge.values[k] <= 1e-12 * std::max(lam_max, 1e-300)) continue;
      data.gram_pinv.noalias() += (1.0 / ge.values[k]) * ge.vectors.col(k) *
                                  ge.vectors.col(k).transpose();
    }
    // Inconsistent equalities (b outside the range of the constraint
    // map) cannot be projected onto; flag instead of iterating forever.
    const Vec probe = gram * (data.gram_pinv * data.b) - data.b;
    data.inconsistency = probe.cwiseAbs().maxCoeff();
    data.consistent =
        data.inconsistency <= 1e-9 * (1.0 + data.b.cwiseAbs().maxCoeff());
  }
  return data;
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, double tol, int max_iters) {
  problem.validate();
  require(tol > 0.0, "sdp solve: tol must be positive");
  require(max_iters >= 1, "sdp solve: max_iters must be positive");

  const SolverData data = prepare(problem);
  const int q = data.q;
  const int n_eq = data.n_eq;
  const int n_slack =
      data.nonneg_in_affine ? 0 : static_cast<int>(data.nonneg.size());

  SdpSolution sol;
  sol.W = Mat::Zero(q, q);
  if (!data.consistent) {
    sol.status = SdpStatus::infeasible_suspected;
    sol.primal_residual = data.inconsistency;
    return sol;
  }

  // Internal cost normalization: with unit step ratio the cost norm sets
  // the effective step length, and this problem class converges fastest
  // near a fixed norm. The solution is unchanged; reported residuals and
  // objective are expressed in the caller's cost units.
  const double raw_norm = problem.cost.norm();
  const double cost_scale = raw_norm > 1e-12 ? 20.0 / raw_norm : 1.0;
  const Mat cost =
      cost_scale * 0.5 * (problem.cost + problem.cost.transpose());
  const double relax = 1.5;

  // Slack-path bookkeeping (only when an equality touches a flagged
  // entry): tr(E_j W) - s_j = 0 with s in the nonnegative cone block.
  std::vector<Mat> link_mats;
  Mat link_gram_pinv;
  if (n_slack > 0) {
    for (const auto& [r, c] : data.nonneg) {
      Mat E = Mat::Zero(q, q);
      if (r == c) {
        E(r, c) = 1.0;
      } else {
        E(r, c) = 0.5;
        E(c, r) = 0.5;
      }
      link_mats.push_back(std::move(E));
    }
    const int rows = n_eq + n_slack;
    Mat gram = Mat::Zero(rows, rows);
    auto row_mat = [&](int l) -> const Mat& {
      return l < n_eq ? data.eq_mats[l] : link_mats[l - n_eq];
    };
    for (int l = 0; l < rows; ++l)
      for (int m = l; m < rows; ++m) {
        double g = (row_mat(l).array() * row_mat(m).array()).sum();
        if (l >= n_eq && l == m) g += 1.0;
        gram(l, m) = g;
        gram(m, l) = g;
      }
    const SymEig ge = jacobi_eigensym(gram);
    const double lam_max = std::max(ge.values[rows - 1], 0.0);
    link_gram_pinv = Mat::Zero(rows, rows);
    for (int k = 0; k < rows; ++k) {
      if (ge.values[k] <= 1e-12 * std::max(lam_max, 1e-300)) continue;
      link_gram_pinv.noalias() += (1.0 / ge.values[k]) * ge.vectors.col(k) *
                                  ge.vectors.col(k).transpose();
    }
  }

  Mat Zw = Mat::Zero(q, q), Uw = Mat::Zero(q, q);
  Vec zs = Vec::Zero(n_slack), us = Vec::Zero(n_slack);
  Mat Xw(q, q), Yw(q, q);
  Vec xs(n_slack), ys(n_slack);

  double best_primal = std::numeric_limits<double>::infinity();
  int best_primal_iter = 0;
  int dual_resets = 0;

  int iter = 0;
  for (; iter < max_iters; ++iter) {
    // Prox of the linear cost over the affine set (plus entry clamps
    // when they live in this block).
    Xw = Zw - Uw - cost;
    if (n_slack > 0) {
      xs = zs - us;
      const int rows = n_eq + n_slack;
      Vec rhs(rows);
      for (int l = 0; l < n_eq; ++l)
        rhs[l] = data.b[l] - (data.eq_mats[l].array() * Xw.array()).sum();
      for (int j = 0; j < n_slack; ++j)
        rhs[n_eq + j] =
            -((link_mats[j].array() * Xw.array()).sum() - xs[j]);
      const Vec mu = link_gram_pinv * rhs;
      for (int l = 0; l < n_eq; ++l) Xw.noalias() += mu[l] * data.eq_mats[l];
      for (int j = 0; j < n_slack; ++j) {
        Xw.noalias() += mu[n_eq + j] * link_mats[j];
        xs[j] -= mu[n_eq + j];
      }
    } else if (n_eq > 0) {
      Vec rhs(n_eq);
      for (int l = 0; l < n_eq; ++l)
        rhs[l] = data.b[l] - (data.eq_mats[l].array() * Xw.array()).sum();
      const Vec mu = data.gram_pinv * rhs;
      for (int l = 0; l < n_eq; ++l) Xw.noalias() += mu[l] * data.eq_mats[l];
    }
    if (data.nonneg_in_affine) {
      for (const auto& [r, c] : data.nonneg) {
        const double v = std::max(Xw(r, c), 0.0);
        Xw(r, c) = v;
        Xw(c, r) = v;
      }
    }

    // Over-relaxed cone projection and dual update.
    Yw = relax * Xw + (1.0 - relax) * Zw + Uw;
    Mat Zw_new = project_psd(Yw);
    Uw += relax * Xw + (1.0 - relax) * Zw - Zw_new;

    double dual_sq = (Zw_new - Zw).squaredNorm();
    if (n_slack > 0) {
      ys = relax * xs + (1.0 - relax) * zs + us;
      Vec zs_new = ys.cwiseMax(0.0);
      us += relax * xs + (1.0 - relax) * zs - zs_new;
      dual_sq += (zs_new - zs).squaredNorm();
      zs = std::move(zs_new);
    }
    const double dual_res = std::sqrt(dual_sq) / cost_scale;
    Zw = std::move(Zw_new);

    double primal_res = 0.0;
    for (int l = 0; l < n_eq; ++l)
      primal_res = std::max(
          primal_res,
          std::abs((data.eq_mats[l].array() * Zw.array()).sum() - data.b[l]));
    for (const auto& [r, c] : data.nonneg)
      primal_res = std::max(primal_res, -std::min(Zw(r, c), 0.0));

    if (primal_res < best_primal * (1.0 - 1e-6)) {
      best_primal = primal_res;
      best_primal_iter = iter;
    }

    sol.primal_residual = primal_res;
    sol.dual_residual = dual_res;
    if (primal_res <= tol && dual_res <= tol) {
      sol.status = SdpStatus::converged;
      ++iter;
      break;
    }
    if (iter - best_primal_iter >= 5000 && primal_res > 1e3 * tol) {
      // Degenerate faces can park the dual on an unbounded ray, freezing
      // the residuals; restarting the dual from the incumbent cone
      // iterate breaks the drift. Persistent stagnation is flagged.
      if (dual_resets < 3) {
        ++dual_resets;
        Uw.setZero();
        us.setZero();
        best_primal = std::numeric_limits<double>::infinity();
        best_primal_iter = iter;
        continue;
      }
      sol.status = SdpStatus::infeasible_suspected;
      ++iter;
      break;
    }
  }

  sol.W = Zw;
  sol.iterations = iter;
  sol.objective = (cost.array() * sol.W.array()).sum() / cost_scale;
  return sol;
}

}  // namespace hybridloc

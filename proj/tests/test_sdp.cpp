#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridloc/floris.hpp"
#include "hybridloc/sdp.hpp"
#include "test_util.hpp"

using namespace hybridloc;
using testutil::random_symmetric;

TEST_CASE("jacobi eigendecomposition reconstructs the input") {
  RandomStream rng(11);
  for (int q : {2, 5, 12, 30}) {
    const Mat S = random_symmetric(rng, q, 2.0);
    const SymEig eig = jacobi_eigensym(S);
    const Mat recon = eig.vectors * eig.values.asDiagonal() *
                      eig.vectors.transpose();
    CHECK((recon - S).norm() <= 1e-10 * std::max(1.0, S.norm()));
    CHECK((eig.vectors.transpose() * eig.vectors - Mat::Identity(q, q))
              .norm() <= 1e-10);
    for (int k = 1; k < q; ++k) CHECK(eig.values[k] >= eig.values[k - 1]);
  }
}

TEST_CASE("project_psd clamps the negative spectrum") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = -1.0;
  Mat expect = Mat::Zero(2, 2);
  expect(0, 0) = 2.0;
  CHECK((project_psd(d) - expect).norm() <= 1e-12);

  RandomStream rng(3);
  const Mat S = random_symmetric(rng, 6);
  const Mat psd = project_psd(S);
  CHECK((project_psd(psd) - psd).norm() <= 1e-10);

  Mat offdiag = Mat::Zero(2, 2);
  offdiag(0, 1) = offdiag(1, 0) = 1.0;
  Mat half = Mat::Constant(2, 2, 0.5);
  CHECK((project_psd(offdiag) - half).norm() <= 1e-12);
}

TEST_CASE("rank1_ratio") {
  RandomStream rng(5);
  Vec v = testutil::random_vec(rng, 4);
  const Mat outer = v * v.transpose();
  CHECK(std::isinf(rank1_ratio(outer)));

  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 20.0;
  d(1, 1) = 1.0;
  CHECK(rank1_ratio(d) == doctest::Approx(20.0));
  d(0, 0) = 19.9;
  CHECK(rank1_ratio(d) == doctest::Approx(19.9));
  CHECK(rank1_ratio(d) < 20.0);

  CHECK_THROWS_AS(rank1_ratio(Mat::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("scalar SDP fully pinned by its constraint") {
  SdpProblem problem;
  problem.dim = 1;
  problem.cost = Mat::Identity(1, 1);
  problem.eq_constraints.emplace_back(Mat::Identity(1, 1), 1.0);
  const SdpSolution sol = solve(problem, 1e-9, 20000);
  CHECK(sol.status == SdpStatus::converged);
  CHECK(sol.W(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("trace-one eigenvalue problem picks the smallest eigenvalue") {
  SdpProblem problem;
  problem.dim = 2;
  problem.cost = Mat::Zero(2, 2);
  problem.cost(0, 0) = 1.0;
  problem.cost(1, 1) = 2.0;
  problem.eq_constraints.emplace_back(Mat::Identity(2, 2), 1.0);
  const SdpSolution sol = solve(problem, 1e-9, 50000);
  CHECK(sol.status == SdpStatus::converged);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.W(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.W(1, 1) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("noiseless two-bearing instance attains zero and recovers scales") {
  // Lines from (0,0) along (1,1)/sqrt2 and from (2,0) along (-1,1)/sqrt2
  // intersect only at (1,1); both true scales are sqrt2.
  FlorisProblem problem;
  problem.n = 2;
  Vec a1 = Vec::Zero(2), a2 = Vec::Zero(2);
  a2[0] = 2.0;
  const double s = 1.0 / std::sqrt(2.0);
  Vec u1(2), u2(2);
  u1 << s, s;
  u2 << -s, s;
  problem.bearing_anchors.emplace_back(a1, Bearing(u1));
  problem.bearing_anchors.emplace_back(a2, Bearing(u2));

  // The homogenized quadratic form must vanish at the truth.
  const Mat M = build_M(problem);
  Vec truth(3);
  truth << std::sqrt(2.0), std::sqrt(2.0), 1.0;
  CHECK(truth.dot(M * truth) == doctest::Approx(0.0).epsilon(1e-12));

  const SdpSolution sol = solve(build_sdp(problem), 1e-9, 100000);
  CHECK(sol.status == SdpStatus::converged);
  CHECK(std::abs(sol.objective) <= 1e-6);
  auto [theta, t] = recover_from_W(sol.W, problem);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
  CHECK(t[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
}

TEST_CASE("inconsistent equality constraints flag infeasibility") {
  SdpProblem problem;
  problem.dim = 2;
  problem.cost = Mat::Identity(2, 2);
  problem.eq_constraints.emplace_back(Mat::Zero(2, 2), 1.0);
  const SdpSolution sol = solve(problem, 1e-8, 1000);
  CHECK(sol.status == SdpStatus::infeasible_suspected);
}

TEST_CASE("determinism: identical inputs give identical iterates") {
  RandomStream rng(17);
  SdpProblem problem;
  problem.dim = 5;
  problem.cost = random_symmetric(rng, 5);
  problem.eq_constraints.emplace_back(Mat::Identity(5, 5), 2.0);
  problem.eq_constraints.emplace_back(random_symmetric(rng, 5), 0.3);
  problem.nonneg_entries = {{0, 4}, {1, 3}};

  const SdpSolution a = solve(problem, 1e-8, 20000);
  const SdpSolution b = solve(problem, 1e-8, 20000);
  CHECK(a.iterations == b.iterations);
  CHECK((a.W - b.W).cwiseAbs().maxCoeff() == 0.0);
}

namespace {

// Feasible-point oracle independent of the solver: plain alternating
// projections between the affine set and the cone, no dual updates.
Mat alternating_projection_feasible(const SdpProblem& problem, const Mat& seed,
                                    int iters) {
  const int q = problem.dim;
  const int n_eq = static_cast<int>(problem.eq_constraints.size());
  Mat W = 0.5 * (seed + seed.transpose());
  for (int it = 0; it < iters; ++it) {
    for (int l = 0; l < n_eq; ++l) {
      const Mat& A = problem.eq_constraints[l].first;
      const double b = problem.eq_constraints[l].second;
      const double scale = (A.array() * A.array()).sum();
      W += (b - (A.array() * W.array()).sum()) / scale * A;
    }
    for (auto [r, c] : problem.nonneg_entries) {
      if (W(r, c) < 0.0) {
        W(r, c) = 0.0;
        if (r != c) W(c, r) = 0.0;
      }
    }
    W = project_psd(W);
  }
  return W;
}

}  // namespace

TEST_CASE("objective dominates brute-force feasible points") {
  RandomStream rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const int q = 5;
    SdpProblem problem;
    problem.dim = q;
    // PSD cost keeps the objective bounded over the cone.
    const Mat C = random_symmetric(rng, q);
    problem.cost = C * C.transpose();
    problem.cost = 0.5 * (problem.cost + problem.cost.transpose());

    // Feasible by construction around a random PSD matrix.
    Mat B(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j) B(i, j) = rng.next_gaussian();
    const Mat W0 = B * B.transpose();
    for (int l = 0; l < 3; ++l) {
      const Mat A = random_symmetric(rng, q);
      problem.eq_constraints.emplace_back(A, (A.array() * W0.array()).sum());
    }
    for (int i = 0; i < q && problem.nonneg_entries.size() < 2; ++i)
      for (int j = i + 1; j < q; ++j)
        if (W0(i, j) >= 0.0 && problem.nonneg_entries.size() < 2)
          problem.nonneg_entries.emplace_back(i, j);

    const double tol = 1e-7;
    const SdpSolution sol = solve(problem, tol, 100000);
    REQUIRE(sol.status == SdpStatus::converged);

    // Constraint satisfaction at convergence.
    for (const auto& [A, b] : problem.eq_constraints)
      CHECK(std::abs((A.array() * sol.W.array()).sum() - b) <= tol);
    for (auto [r, c] : problem.nonneg_entries) CHECK(sol.W(r, c) >= -tol);
    const SymEig eig = jacobi_eigensym(sol.W);
    CHECK(eig.values[0] >= -tol * std::max(1.0, sol.W.norm()));

    for (int probe = 0; probe < 4; ++probe) {
      const Mat feas = alternating_projection_feasible(
          problem, random_symmetric(rng, q, 2.0), 4000);
      const double obj_feas =
          (problem.cost.array() * feas.array()).sum();
      CHECK(sol.objective <= obj_feas + 10 * tol);
    }
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridloc/floris.hpp"
#include "hybridloc/refine.hpp"
#include "hybridloc/simulate.hpp"
#include "test_util.hpp"

using namespace hybridloc;
using testutil::random_unit;
using testutil::random_vec;

namespace {

Vec make_vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Noiseless single-source problem from a ground-truth point.
FlorisProblem noiseless_problem(const Vec& truth,
                                const std::vector<Vec>& range_anchors,
                                const std::vector<Vec>& bearing_anchors) {
  FlorisProblem problem;
  problem.n = static_cast<int>(truth.size());
  for (const Vec& a : range_anchors)
    problem.range_anchors.emplace_back(a, (truth - a).norm());
  for (const Vec& a : bearing_anchors)
    problem.bearing_anchors.emplace_back(
        a, Bearing((truth - a) / (truth - a).norm()));
  return problem;
}

double single_source_cost(const Vec& x, const FlorisProblem& problem) {
  double cost = 0.0;
  for (const auto& [a, d] : problem.range_anchors)
    cost += dist2_sphere(x - a, d);
  for (const auto& [a, u] : problem.bearing_anchors)
    cost += dist2_line(x - a, u);
  return cost;
}

}  // namespace

TEST_CASE("build_R block layouts") {
  FlorisProblem only_range;
  only_range.n = 2;
  only_range.range_anchors.emplace_back(make_vec({0, 0}), 2.0);
  Mat R = build_R(only_range);
  REQUIRE(R.rows() == 2);
  REQUIRE(R.cols() == 2);
  CHECK((R - 2.0 * Mat::Identity(2, 2)).norm() == doctest::Approx(0.0));

  FlorisProblem only_bearing;
  only_bearing.n = 2;
  only_bearing.bearing_anchors.emplace_back(make_vec({0, 0}),
                                            Bearing(make_vec({0, 1})));
  R = build_R(only_bearing);
  REQUIRE(R.rows() == 2);
  REQUIRE(R.cols() == 1);
  CHECK(R(0, 0) == 0.0);
  CHECK(R(1, 0) == 1.0);

  FlorisProblem mixed;
  mixed.n = 2;
  mixed.range_anchors.emplace_back(make_vec({0, 0}), 1.0);
  mixed.bearing_anchors.emplace_back(make_vec({0, 0}),
                                     Bearing(make_vec({1, 0})));
  R = build_R(mixed);
  REQUIRE(R.rows() == 4);
  REQUIRE(R.cols() == 3);
  Mat expect = Mat::Zero(4, 3);
  expect(0, 0) = expect(1, 1) = expect(2, 2) = 1.0;
  CHECK((R - expect).norm() == doctest::Approx(0.0));
}

TEST_CASE("build_J is the centering projector") {
  CHECK(build_J(1, 3).norm() == doctest::Approx(0.0));

  const Mat j21 = build_J(2, 1);
  Mat expect(2, 2);
  expect << 0.5, -0.5, -0.5, 0.5;
  CHECK((j21 - expect).norm() == doctest::Approx(0.0));

  // Kronecker identity (I3 - ones/3) (x) I2.
  const Mat j32 = build_J(3, 2);
  Mat center = Mat::Identity(3, 3) - Mat::Constant(3, 3, 1.0 / 3.0);
  Mat kron = Mat::Zero(6, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      kron.block(i * 2, j * 2, 2, 2) = center(i, j) * Mat::Identity(2, 2);
  CHECK((j32 - kron).norm() <= 1e-14);

  // Projector properties.
  CHECK((j32 * j32 - j32).norm() <= 1e-14);
  Mat ones_in(6, 2);
  ones_in << Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2);
  CHECK((j32 * ones_in).norm() <= 1e-14);
}

TEST_CASE("build_M matches the substituted quadratic form") {
  RandomStream rng(15);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    FlorisProblem problem;
    problem.n = n;
    for (int k = 0; k < 3; ++k)
      problem.range_anchors.emplace_back(random_vec(rng, n),
                                         rng.next_uniform(0.1, 2.0));
    for (int k = 0; k < 2; ++k)
      problem.bearing_anchors.emplace_back(random_vec(rng, n),
                                           Bearing(random_unit(rng, n)));

    const Mat M = build_M(problem);
    const Mat R = build_R(problem);
    const Mat J = build_J(problem.m(), n);
    const Vec a = stacked_anchors(problem);

    CHECK(M(problem.p(), problem.p()) ==
          doctest::Approx(a.dot(J * a)).epsilon(1e-12));

    const Vec v1 = random_vec(rng, problem.p());
    Vec v(problem.p() + 1);
    v << v1, 1.0;
    const Vec y = a + R * v1;
    CHECK(v.dot(M * v) == doctest::Approx(y.dot(J * y)).epsilon(1e-10));
  }
}

TEST_CASE("noiseless quadratic form vanishes at the truth") {
  RandomStream rng(99);
  const Vec truth = make_vec({0.4, 0.7});
  FlorisProblem problem = noiseless_problem(
      truth, {make_vec({0, 0}), make_vec({1, 0})}, {make_vec({0, 1})});
  const Mat M = build_M(problem);

  Vec v(problem.p() + 1);
  for (int k = 0; k < problem.num_ranges(); ++k)
    v.segment(k * 2, 2) = (truth - problem.range_anchors[k].first) /
                          (truth - problem.range_anchors[k].first).norm();
  v[4] = (truth - problem.bearing_anchors[0].first).norm();
  v[5] = 1.0;
  CHECK(v.dot(M * v) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("four corner anchors recover an interior source") {
  const Vec truth = make_vec({0.3, 0.4});
  FlorisProblem problem = noiseless_problem(
      truth,
      {make_vec({0, 0}), make_vec({1, 0}), make_vec({0, 1}), make_vec({1, 1})},
      {});

  // Independent oracle: dense grid search over the unit square confirms
  // the cost has its unique minimum at the truth.
  double best = 1e300;
  Vec best_x = make_vec({0, 0});
  for (int gx = 0; gx <= 100; ++gx) {
    for (int gy = 0; gy <= 100; ++gy) {
      const Vec x = make_vec({gx / 100.0, gy / 100.0});
      const double c = single_source_cost(x, problem);
      if (c < best) {
        best = c;
        best_x = x;
      }
    }
  }
  CHECK((best_x - truth).norm() <= 1e-9);

  const FlorisSolution sol = solve_floris(problem);
  CHECK((sol.x_hat - truth).norm() <= 1e-4);
  CHECK(sol.rank1 >= 1e3);
}

TEST_CASE("two bearing anchors recover the line intersection") {
  // Closed-form oracle: intersection of a1 + t1 u1 and a2 + t2 u2.
  const Vec a1 = make_vec({0.1, 0.2});
  const Vec a2 = make_vec({0.9, 0.1});
  const Vec u1 = make_vec({0.6, 0.8});
  const Vec u2v = make_vec({-0.6, 0.8});
  Mat lhs(2, 2);
  lhs << u1[0], -u2v[0], u1[1], -u2v[1];
  Vec rhs = a2 - a1;
  const Vec ts = lhs.partialPivLu().solve(rhs);
  const Vec expect = a1 + ts[0] * u1;

  FlorisProblem problem;
  problem.n = 2;
  problem.bearing_anchors.emplace_back(a1, Bearing(u1));
  problem.bearing_anchors.emplace_back(a2, Bearing(u2v));
  const FlorisSolution sol = solve_floris(problem, 1e-9);
  CHECK((sol.x_hat - expect).norm() <= 1e-4);
}

TEST_CASE("recover_from_W on exact rank-1 matrices") {
  FlorisProblem problem;
  problem.n = 2;
  problem.range_anchors.emplace_back(make_vec({0, 0}), 1.0);
  problem.bearing_anchors.emplace_back(make_vec({2, 2}),
                                       Bearing(make_vec({0, 1})));

  Vec v(4);
  v << 0.6, 0.8, 1.5, 1.0;
  auto [theta, t] = recover_from_W(v * v.transpose(), problem);
  CHECK((theta[0] - make_vec({0.6, 0.8})).norm() <= 1e-12);
  CHECK(t[0] == doctest::Approx(1.5));

  // Eigenvector sign ambiguity: scaling handles a flipped factor.
  auto [theta2, t2] = recover_from_W((-v) * (-v).transpose(), problem);
  CHECK((theta2[0] - make_vec({0.6, 0.8})).norm() <= 1e-12);
  CHECK(t2[0] == doctest::Approx(1.5));
}

TEST_CASE("zero-range anchor pins the source without breaking recovery") {
  const Vec truth = make_vec({0.5, 0.5});
  FlorisProblem problem;
  problem.n = 2;
  problem.range_anchors.emplace_back(truth, 0.0);  // pinned
  problem.range_anchors.emplace_back(make_vec({0, 0}), truth.norm());
  problem.range_anchors.emplace_back(make_vec({1, 0}),
                                     (truth - make_vec({1, 0})).norm());
  const FlorisSolution sol = solve_floris(problem);
  CHECK((sol.x_hat - truth).norm() <= 1e-3);
}

TEST_CASE("reduced solve: no bearings means the identical problem") {
  const Vec truth = make_vec({0.25, 0.6});
  FlorisProblem problem = noiseless_problem(
      truth, {make_vec({0, 0}), make_vec({1, 0}), make_vec({0, 1})}, {});
  const FlorisSolution full = solve_floris(problem);
  const FlorisSolution reduced = solve_floris_reduced(problem);
  CHECK((full.x_hat - reduced.x_hat).norm() == 0.0);  // same code path
  CHECK(full.W.rows() == reduced.W.rows());
}

TEST_CASE("reduced solve matches the full solve on noiseless data") {
  RandomStream rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const Vec truth = random_vec(rng, n, 0.0, 1.0);
    std::vector<Vec> range_as, bearing_as;
    for (int k = 0; k < 4; ++k) range_as.push_back(random_vec(rng, n, 0.0, 1.0));
    for (int k = 0; k < 3; ++k)
      bearing_as.push_back(random_vec(rng, n, 0.0, 1.0));
    FlorisProblem problem = noiseless_problem(truth, range_as, bearing_as);

    const FlorisSolution full = solve_floris(problem, 1e-9);
    const FlorisSolution reduced = solve_floris_reduced(problem, 1e-9);
    CHECK((full.x_hat - reduced.x_hat).norm() <= 1e-6);
    CHECK(reduced.W.rows() == n * 4 + 1);  // side shrinks from p+1
    CHECK(full.W.rows() == problem.p() + 1);
  }
}

TEST_CASE("reduced solve stays close to full on noisy instances") {
  RandomStream rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2;
    const Scenario sc = generate_single_source(
        n, ScenarioCounts{8, 4, 1}, stream_key(400, {static_cast<uint64_t>(trial)}));
    const MeasurementSet meas = synthesize_measurements(
        sc, NoiseModel{0.1, stream_key(41, {static_cast<uint64_t>(trial)})});
    const FlorisProblem problem = make_floris_problem(sc, meas);
    const FlorisSolution full = solve_floris(problem, 1e-9);
    const FlorisSolution reduced = solve_floris_reduced(problem, 1e-9);
    CHECK((full.x_hat - reduced.x_hat).norm() <= 1e-3);
  }
}

TEST_CASE("anchor permutation leaves the estimate unchanged") {
  const Scenario sc = generate_single_source(2, ScenarioCounts{5, 3, 1}, 1234);
  const MeasurementSet meas =
      synthesize_measurements(sc, NoiseModel{0.05, 99});
  const FlorisProblem problem = make_floris_problem(sc, meas);

  FlorisProblem shuffled = problem;
  std::swap(shuffled.range_anchors[0], shuffled.range_anchors[4]);
  std::swap(shuffled.range_anchors[1], shuffled.range_anchors[3]);
  std::swap(shuffled.bearing_anchors[0], shuffled.bearing_anchors[2]);

  const FlorisSolution a = solve_floris(problem, 1e-12, 300000);
  const FlorisSolution b = solve_floris(shuffled, 1e-12, 300000);
  CHECK((a.x_hat - b.x_hat).norm() <= 1e-9);
}

TEST_CASE("zero-noise exactness over random well-posed instances") {
  RandomStream rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const Vec truth = random_vec(rng, n, 0.0, 1.0);
    std::vector<Vec> range_as, bearing_as;
    for (int k = 0; k < n + 2; ++k)
      range_as.push_back(random_vec(rng, n, 0.0, 1.0));
    for (int k = 0; k < 2; ++k)
      bearing_as.push_back(random_vec(rng, n, 0.0, 1.0));
    FlorisProblem problem = noiseless_problem(truth, range_as, bearing_as);
    const FlorisSolution sol = solve_floris(problem);
    CHECK((sol.x_hat - truth).norm() <= 1e-3);
    CHECK(sol.rank1 >= 1e3);
  }
}

TEST_CASE("relaxed objective underestimates the refined nonconvex cost") {
  RandomStream rng(314);
  for (int trial = 0; trial < 4; ++trial) {
    const Scenario sc = generate_single_source(
        2, ScenarioCounts{6, 3, 1}, stream_key(500, {static_cast<uint64_t>(trial)}));
    const MeasurementSet meas = synthesize_measurements(
        sc, NoiseModel{0.2, stream_key(501, {static_cast<uint64_t>(trial)})});
    const FlorisProblem problem = make_floris_problem(sc, meas);
    const FlorisSolution sol = solve_floris(problem);

    const NetworkProblem refinement = make_network_problem(sc, meas);
    const RefineReport refined = refine(sol.x_hat, refinement);
    CHECK(sol.sdp.objective <= refined.cost + 1e-6);
  }
}

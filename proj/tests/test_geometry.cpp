#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridloc/geometry.hpp"
#include "hybridloc/network.hpp"
#include "test_util.hpp"

using namespace hybridloc;
using testutil::random_rotation;
using testutil::random_unit;
using testutil::random_vec;

namespace {
Vec make_vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("project_ball basics") {
  CHECK((project_ball(make_vec({3, 4}), 10.0) - make_vec({3, 4})).norm() ==
        doctest::Approx(0.0));
  CHECK((project_ball(make_vec({3, 4}), 1.0) - make_vec({0.6, 0.8})).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(project_ball(make_vec({0, 0}), 0.0).norm() == 0.0);

  Vec bad = make_vec({1, 2});
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(project_ball(bad, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(project_ball(make_vec({1, 2}), -1.0), std::invalid_argument);
}

TEST_CASE("project_line basics") {
  const Bearing ex(make_vec({1, 0}));
  CHECK((project_line(make_vec({3, 4}), ex) - make_vec({3, 0})).norm() ==
        doctest::Approx(0.0));

  const Bearing diag(make_vec({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}));
  CHECK((project_line(make_vec({2, 2}), diag) - make_vec({2, 2})).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));

  const Bearing ez(make_vec({0, 0, 1}));
  CHECK(project_line(make_vec({1, 0, 0}), ez).norm() ==
        doctest::Approx(0.0));

  CHECK_THROWS_AS(Bearing(make_vec({1, 1})), std::invalid_argument);
}

TEST_CASE("bearing renormalization within tolerance") {
  Vec almost = make_vec({1.0 + 5e-10, 0.0});
  const Bearing b(almost);
  CHECK(b.direction().norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dist2_sphere basics") {
  CHECK(dist2_sphere(make_vec({3, 4}), 5.0) == doctest::Approx(0.0));
  CHECK(dist2_sphere(make_vec({3, 4}), 1.0) == doctest::Approx(16.0));
  CHECK(dist2_sphere(make_vec({0, 0}), 2.0) == doctest::Approx(4.0));
}

TEST_CASE("dist2_line basics") {
  CHECK(dist2_line(make_vec({3, 4}), Bearing(make_vec({1, 0}))) ==
        doctest::Approx(16.0));
  CHECK(dist2_line(make_vec({5, 0}), Bearing(make_vec({1, 0}))) ==
        doctest::Approx(0.0));
  CHECK(dist2_line(make_vec({1, 1, 1}), Bearing(make_vec({0, 0, 1}))) ==
        doctest::Approx(2.0));
}

TEST_CASE("hybrid_cost_single examples") {
  std::map<NodeId, Vec> anchors;
  anchors["a"] = make_vec({1, 0});
  anchors["b"] = make_vec({0, 1});

  // On the sphere of a and on the line of b.
  std::vector<RangeMeasurement> ranges = {{"a", "s", 1.0}};
  std::vector<BearingMeasurement> bearings = {
      {"b", "s", Bearing(make_vec({0, -1}))}};
  CHECK(hybrid_cost_single(make_vec({0, 0}), anchors, ranges, bearings) ==
        doctest::Approx(0.0));

  // Independent hand evaluation: (2-1)^2 + squared off-line component.
  anchors["a"] = make_vec({2, 0});
  anchors["b"] = make_vec({0, 2});
  bearings[0] = {"b", "s", Bearing(make_vec({1, 0}))};
  const double cost =
      hybrid_cost_single(make_vec({0, 0}), anchors, ranges, bearings);
  const double oracle = dist2_sphere(make_vec({-2, 0}), 1.0) +
                        dist2_line(make_vec({0, -2}), Bearing(make_vec({1, 0})));
  CHECK(cost == doctest::Approx(5.0));
  CHECK(cost == doctest::Approx(oracle));

  std::vector<RangeMeasurement> dangling = {{"zz", "s", 1.0}};
  CHECK_THROWS_AS(hybrid_cost_single(make_vec({0, 0}), anchors, dangling, {}),
                  std::invalid_argument);
}

TEST_CASE("projections are idempotent, nonexpansive and odd") {
  RandomStream rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_uniform(0.0, 3.0));
    const Vec z1 = random_vec(rng, n, -3.0, 3.0);
    const Vec z2 = random_vec(rng, n, -3.0, 3.0);
    const double radius = rng.next_uniform(0.0, 2.0);
    const Bearing u(random_unit(rng, n));

    const Vec pb = project_ball(z1, radius);
    CHECK((project_ball(pb, radius) - pb).norm() <= 1e-12);
    const Vec pl = project_line(z1, u);
    CHECK((project_line(pl, u) - pl).norm() <= 1e-12);

    CHECK((project_ball(z1, radius) - project_ball(z2, radius)).norm() <=
          (z1 - z2).norm() + 1e-12);
    CHECK((project_line(z1, u) - project_line(z2, u)).norm() <=
          (z1 - z2).norm() + 1e-12);

    CHECK((project_ball(-z1, radius) + project_ball(z1, radius)).norm() <=
          1e-12);
    CHECK((project_line(-z1, u) + project_line(z1, u)).norm() <= 1e-12);

    // Pythagoras split of the line distance.
    const double lhs = dist2_line(z1, u);
    const double rhs = z1.squaredNorm() - project_line(z1, u).squaredNorm();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("network cost reduces to the single-source cost and matches a "
          "term-by-term oracle") {
  // Single node, anchors only: identical to the single-source cost.
  NetworkProblem solo;
  solo.n = 2;
  solo.add_node("s0");
  solo.add_anchor_range("s0", "a0", make_vec({2, 0}), 1.0);
  solo.add_anchor_bearing("s0", "a1", make_vec({0, 2}),
                          Bearing(make_vec({1, 0})));
  std::map<NodeId, Vec> anchors = {{"a0", make_vec({2, 0})},
                                   {"a1", make_vec({0, 2})}};
  std::vector<RangeMeasurement> ranges = {{"a0", "s0", 1.0}};
  std::vector<BearingMeasurement> bearings = {
      {"a1", "s0", Bearing(make_vec({1, 0}))}};
  const Vec x0 = make_vec({0, 0});
  CHECK(hybrid_cost_network(x0, solo) ==
        doctest::Approx(hybrid_cost_single(x0, anchors, ranges, bearings)));

  // All nodes at the truth with noiseless measurements: zero cost.
  NetworkProblem pair;
  pair.n = 2;
  pair.add_node("s0");
  pair.add_node("s1");
  const Vec t0 = make_vec({0.2, 0.3}), t1 = make_vec({0.8, 0.5});
  pair.add_range_edge("s0", "s1", (t0 - t1).norm());
  pair.add_anchor_range("s0", "a0", make_vec({0, 0}), t0.norm());
  pair.add_anchor_bearing("s1", "a1", make_vec({1, 1}),
                          Bearing((t1 - make_vec({1, 1})).normalized()));
  Vec truth(4);
  truth << t0, t1;
  CHECK(hybrid_cost_network(truth, pair) == doctest::Approx(0.0));

  // Perturbed evaluation point: independent summation over every term.
  RandomStream rng(101);
  const Vec x = truth + 0.3 * random_vec(rng, 4);
  const Vec z01 = x.segment(0, 2) - x.segment(2, 2);
  double oracle = 0.0;
  {
    const double excess = z01.norm() - (t0 - t1).norm();
    oracle += excess * excess;
  }
  {
    const double excess = x.segment(0, 2).norm() - t0.norm();
    oracle += excess * excess;
  }
  {
    const Vec z = x.segment(2, 2) - make_vec({1, 1});
    const Vec u = (t1 - make_vec({1, 1})).normalized();
    oracle += z.squaredNorm() - std::pow(u.dot(z), 2.0);
  }
  CHECK(hybrid_cost_network(x, pair) ==
        doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("hybrid cost is invariant under global rigid transforms") {
  RandomStream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const Mat rot = random_rotation(rng, n);
    const Vec shift = random_vec(rng, n, -2.0, 2.0);

    std::map<NodeId, Vec> anchors, moved;
    std::vector<RangeMeasurement> ranges;
    std::vector<BearingMeasurement> bearings, moved_bearings;
    const Vec x = random_vec(rng, n);
    for (int k = 0; k < 5; ++k) {
      const NodeId id = "a" + std::to_string(k);
      anchors[id] = random_vec(rng, n);
      moved[id] = rot * anchors[id] + shift;
      if (k < 3) {
        ranges.push_back({id, "s", rng.next_uniform(0.0, 2.0)});
      } else {
        const Bearing u(random_unit(rng, n));
        bearings.push_back({id, "s", u});
        moved_bearings.push_back({id, "s", Bearing(rot * u.direction())});
      }
    }
    const double base = hybrid_cost_single(x, anchors, ranges, bearings);
    const double transformed = hybrid_cost_single(rot * x + shift, moved,
                                                  ranges, moved_bearings);
    CHECK(transformed == doctest::Approx(base).epsilon(1e-9));
  }
}

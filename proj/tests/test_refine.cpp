#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hybridloc/refine.hpp"
#include "test_util.hpp"

using namespace hybridloc;
using testutil::random_vec;

namespace {

Vec make_vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

NetworkProblem noiseless_3d(const Vec& truth) {
  NetworkProblem p;
  p.n = 3;
  p.add_node("s0");
  const std::vector<Vec> anchors = {
      make_vec({0, 0, 0}), make_vec({1, 0, 0}), make_vec({0, 1, 0}),
      make_vec({0, 0, 1})};
  for (size_t k = 0; k < anchors.size(); ++k)
    p.add_anchor_range("s0", "a" + std::to_string(k), anchors[k],
                       (truth - anchors[k]).norm());
  return p;
}

}  // namespace

TEST_CASE("refine returns the start when it is already optimal") {
  const Vec truth = make_vec({0.3, 0.4, 0.5});
  NetworkProblem p = noiseless_3d(truth);
  const RefineReport report = refine(truth, p);
  CHECK(report.cost == doctest::Approx(0.0));
  CHECK((report.x - truth).norm() == doctest::Approx(0.0));
}

TEST_CASE("refine descends from arbitrary starts") {
  RandomStream rng(4);
  const Vec truth = make_vec({0.3, 0.4, 0.5});
  NetworkProblem p = noiseless_3d(truth);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x0 = random_vec(rng, 3, -3.0, 3.0);
    const double f0 = hybrid_cost_network(x0, p);
    for (RefineMethod method : {RefineMethod::simplex, RefineMethod::gradient}) {
      RefineConfig config;
      config.method = method;
      const RefineReport report = refine(x0, p, config);
      CHECK(report.cost <= f0 + 1e-12);
    }
  }
}

TEST_CASE("refine rejects a start where the cost is not evaluable") {
  NetworkProblem p = noiseless_3d(make_vec({0.3, 0.4, 0.5}));
  Vec bad = make_vec({0, 0, 0});
  bad[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(refine(bad, p), std::invalid_argument);
}

TEST_CASE("huang cost vanishes on consistent spherical coordinates") {
  NetworkProblem p;
  p.n = 3;
  p.add_node("s0");
  p.add_anchor_range("s0", "a0", make_vec({0, 0, 0}), 1.0);
  p.add_anchor_bearing("s0", "a0", make_vec({0, 0, 0}),
                       Bearing(make_vec({1, 0, 0})));  // phi=0, alpha=pi/2

  HuangVariances vars;
  vars.range[{"a0", "s0"}] = 1.0;
  vars.azimuth[{"a0", "s0"}] = 1.0;
  vars.elevation[{"a0", "s0"}] = 1.0;

  CHECK(huang_cost(make_vec({1, 0, 0}), p, vars) == doctest::Approx(0.0));

  // Measured azimuth off by 0.1: a single squared residual.
  NetworkProblem p2;
  p2.n = 3;
  p2.add_node("s0");
  p2.add_anchor_range("s0", "a0", make_vec({0, 0, 0}), 1.0);
  p2.add_anchor_bearing(
      "s0", "a0", make_vec({0, 0, 0}),
      Bearing(make_vec({std::cos(0.1), std::sin(0.1), 0.0})));
  CHECK(huang_cost(make_vec({1, 0, 0}), p2, vars) ==
        doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("azimuth residuals wrap across the branch cut") {
  NetworkProblem p;
  p.n = 3;
  p.add_node("s0");
  const double phi_meas = std::numbers::pi - 0.05;
  p.add_anchor_bearing(
      "s0", "a0", make_vec({0, 0, 0}),
      Bearing(make_vec({std::cos(phi_meas), std::sin(phi_meas), 0.0})));

  HuangVariances vars;
  vars.azimuth[{"a0", "s0"}] = 1.0;
  vars.elevation[{"a0", "s0"}] = 1.0;

  // Model azimuth sits at -pi + 0.05; the raw difference is 2pi - 0.1
  // and must wrap to -0.1.
  const double phi_model = -std::numbers::pi + 0.05;
  const Vec x = make_vec(
      {std::cos(phi_model), std::sin(phi_model), 0.0});
  CHECK(huang_cost(x, p, vars) == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("huang cost rejects non-3D problems and zero baselines") {
  NetworkProblem p2d;
  p2d.n = 2;
  p2d.add_node("s0");
  p2d.add_anchor_range("s0", "a0", make_vec({0, 0}), 1.0);
  HuangVariances vars;
  CHECK_THROWS_AS(huang_cost(make_vec({0, 0}), p2d, vars),
                  std::invalid_argument);

  NetworkProblem p;
  p.n = 3;
  p.add_node("s0");
  p.add_anchor_bearing("s0", "a0", make_vec({0.5, 0.5, 0.5}),
                       Bearing(make_vec({1, 0, 0})));
  vars.azimuth[{"a0", "s0"}] = 1.0;
  vars.elevation[{"a0", "s0"}] = 1.0;
  CHECK_THROWS_AS(huang_cost(make_vec({0.5, 0.5, 0.5}), p, vars),
                  std::invalid_argument);
}

TEST_CASE("estimate_variances matches the noise model") {
  const Vec truth = make_vec({0.4, 0.1, 0.6});
  NetworkProblem p;
  p.n = 3;
  p.add_node("s0");
  const Vec anchor = make_vec({0.0, 0.1, 0.6});  // distance 0.4 along x
  p.add_anchor_range("s0", "a0", anchor, 0.4);
  p.add_anchor_bearing("s0", "a0", anchor, Bearing(make_vec({1, 0, 0})));

  SUBCASE("noiseless variances sit at the floor") {
    const HuangVariances v = estimate_variances(p, truth, 0.0, 500, 1);
    CHECK(v.range.at({"a0", "s0"}) == doctest::Approx(1e-12));
    CHECK(v.azimuth.at({"a0", "s0"}) == doctest::Approx(1e-12));
  }

  SUBCASE("range variance scales like eta^2 D^2") {
    const double eta = 0.1, dist = 0.4;
    const HuangVariances v = estimate_variances(p, truth, eta, 100000, 1);
    const double expect = eta * eta * dist * dist;
    CHECK(v.range.at({"a0", "s0"}) ==
          doctest::Approx(expect).epsilon(0.05));
  }

  SUBCASE("estimates are stable in the trial count") {
    const HuangVariances a = estimate_variances(p, truth, 0.1, 1000, 5);
    const HuangVariances b = estimate_variances(p, truth, 0.1, 2000, 5);
    const double ra = a.range.at({"a0", "s0"});
    const double rb = b.range.at({"a0", "s0"});
    CHECK(std::abs(ra - rb) / ra < 0.10);
  }

  CHECK_THROWS_AS(estimate_variances(p, truth, 0.1, 50, 1),
                  std::invalid_argument);
}

TEST_CASE("huang refinement needs variances and then descends") {
  const Vec truth = make_vec({0.3, 0.4, 0.5});
  NetworkProblem p;
  p.n = 3;
  p.add_node("s0");
  RandomStream rng(9);
  for (int k = 0; k < 5; ++k) {
    const Vec a = random_vec(rng, 3, 0.0, 1.0);
    const Vec delta = truth - a;
    p.add_anchor_range("s0", "a" + std::to_string(k), a, delta.norm());
    p.add_anchor_bearing("s0", "a" + std::to_string(k), a,
                         Bearing(delta / delta.norm()));
  }
  RefineConfig config;
  config.cost_kind = CostKind::huang_ml;
  CHECK_THROWS_AS(refine(truth, p, config), std::invalid_argument);

  const HuangVariances vars = estimate_variances(p, truth, 0.05, 500, 3);
  const Vec x0 = truth + 0.2 * random_vec(rng, 3);
  const double f0 = huang_cost(x0, p, vars);
  const RefineReport report = refine(x0, p, config, &vars);
  CHECK(report.cost <= f0 + 1e-12);
  CHECK((report.x - truth).norm() < (x0 - truth).norm());
}

TEST_CASE("nelder-mead minimizes a smooth bowl") {
  const auto rosenbrock_ish = [](const Vec& x) {
    return std::pow(x[0] - 1.0, 2.0) + 4.0 * std::pow(x[1] + 0.5, 2.0);
  };
  const RefineReport report =
      nelder_mead(rosenbrock_ish, make_vec({3, 3}), 5000, 1e-10, 1e-14);
  CHECK(report.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(report.x[1] == doctest::Approx(-0.5).epsilon(1e-5));
  CHECK(report.converged);
}

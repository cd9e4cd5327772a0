#include "hybridloc/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "hybridloc/random.hpp"

namespace hybridloc {

namespace {

std::pair<NodeId, NodeId> range_key(const NodeId& a, const NodeId& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

double lookup(const std::map<std::pair<NodeId, NodeId>, double>& table,
              const std::pair<NodeId, NodeId>& key, const char* what) {
  auto it = table.find(key);
  require(it != table.end(), std::string("huang_cost: missing ") + what +
                                 " variance for pair (" + key.first + ", " +
                                 key.second + ")");
  require(it->second > 0.0, std::string("huang_cost: nonpositive ") + what +
                                " variance");
  return it->second;
}

}  // namespace

std::pair<double, double> azimuth_elevation(const Vec& direction) {
  require(direction.size() == 3, "azimuth_elevation: 3D vector expected");
  const double norm = direction.norm();
  require(norm > 0.0, "azimuth_elevation: zero vector");
  const double azimuth = std::atan2(direction[1], direction[0]);
  const double elevation =
      std::acos(std::clamp(direction[2] / norm, -1.0, 1.0));
  return {azimuth, elevation};
}

double wrap_angle(double a) {
  double r = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (r <= 0.0) r += 2.0 * std::numbers::pi;
  return r - std::numbers::pi;
}

double huang_cost(const Vec& x, const NetworkProblem& problem,
                  const HuangVariances& variances) {
  require(problem.n == 3, "huang_cost: 3D problems only");
  const int n = 3;
  require(x.size() == problem.num_nodes() * n,
          "huang_cost: stacked position size mismatch");

  double cost = 0.0;
  auto range_term = [&](const Vec& delta, double measured,
                        const std::pair<NodeId, NodeId>& key) {
    const double r = measured - delta.norm();
    cost += r * r / lookup(variances.range, key, "range");
  };
  auto angle_terms = [&](const Vec& delta, const Bearing& u,
                         const std::pair<NodeId, NodeId>& key) {
    require(delta.norm() > 0.0,
            "huang_cost: elevation undefined for zero baseline");
    const auto [phi_meas, alpha_meas] = azimuth_elevation(u.direction());
    const auto [phi_model, alpha_model] = azimuth_elevation(delta);
    const double dphi = wrap_angle(phi_meas - phi_model);
    const double dalpha = alpha_meas - alpha_model;
    cost += dphi * dphi / lookup(variances.azimuth, key, "azimuth");
    cost += dalpha * dalpha / lookup(variances.elevation, key, "elevation");
  };

  for (const auto& e : problem.range_edges)
    range_term(x.segment(e.i * n, n) - x.segment(e.j * n, n), e.d,
               range_key(problem.node_ids[e.i], problem.node_ids[e.j]));
  for (const auto& a : problem.anchor_ranges)
    range_term(x.segment(a.node * n, n) - a.anchor, a.d,
               range_key(a.anchor_id, problem.node_ids[a.node]));
  for (const auto& e : problem.bearing_edges)
    angle_terms(x.segment(e.i * n, n) - x.segment(e.j * n, n), e.u,
                {problem.node_ids[e.j], problem.node_ids[e.i]});
  for (const auto& a : problem.anchor_bearings)
    angle_terms(x.segment(a.node * n, n) - a.anchor, a.u,
                {a.anchor_id, problem.node_ids[a.node]});
  return cost;
}

HuangVariances estimate_variances(const NetworkProblem& truth_problem,
                                  const Vec& truth, double eta, int trials,
                                  std::uint64_t seed) {
  require(truth_problem.n == 3, "estimate_variances: 3D problems only");
  require(trials >= 100, "estimate_variances: trials must be at least 100");
  require(eta >= 0.0, "estimate_variances: eta must be nonnegative");
  const int n = 3;
  require(truth.size() == truth_problem.num_nodes() * n,
          "estimate_variances: stacked truth size mismatch");

  auto sample_var = [](const std::vector<double>& v) {
    const double mean =
        std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::max(acc / static_cast<double>(v.size() - 1), 1e-12);
  };

  HuangVariances out;
  std::uint64_t term = 0;
  auto range_var = [&](const Vec& delta0,
                       const std::pair<NodeId, NodeId>& key) {
    require(delta0.norm() > 0.0, "estimate_variances: coincident pair");
    RandomStream rng(stream_key(seed, {0x76617273, ++term}));
    const double sigma = eta * delta0.norm();
    std::vector<double> res(trials);
    for (int t = 0; t < trials; ++t) {
      Vec delta = delta0;
      for (int c = 0; c < n; ++c) delta[c] += sigma * rng.next_gaussian();
      res[t] = delta.norm() - delta0.norm();
    }
    out.range[key] = sample_var(res);
  };
  auto angle_vars = [&](const Vec& delta0,
                        const std::pair<NodeId, NodeId>& key) {
    require(delta0.norm() > 0.0, "estimate_variances: coincident pair");
    RandomStream rng(stream_key(seed, {0x76617273, ++term}));
    const double sigma = eta * delta0.norm();
    const auto [phi0, alpha0] = azimuth_elevation(delta0);
    std::vector<double> res_phi(trials), res_alpha(trials);
    for (int t = 0; t < trials; ++t) {
      Vec delta = delta0;
      for (int c = 0; c < n; ++c) delta[c] += sigma * rng.next_gaussian();
      const auto [phi, alpha] = azimuth_elevation(delta);
      res_phi[t] = wrap_angle(phi - phi0);
      res_alpha[t] = alpha - alpha0;
    }
    out.azimuth[key] = sample_var(res_phi);
    out.elevation[key] = sample_var(res_alpha);
  };

  for (const auto& e : truth_problem.range_edges)
    range_var(truth.segment(e.i * n, n) - truth.segment(e.j * n, n),
              range_key(truth_problem.node_ids[e.i],
                        truth_problem.node_ids[e.j]));
  for (const auto& a : truth_problem.anchor_ranges)
    range_var(truth.segment(a.node * n, n) - a.anchor,
              range_key(a.anchor_id, truth_problem.node_ids[a.node]));
  for (const auto& e : truth_problem.bearing_edges)
    angle_vars(truth.segment(e.i * n, n) - truth.segment(e.j * n, n),
               {truth_problem.node_ids[e.j], truth_problem.node_ids[e.i]});
  for (const auto& a : truth_problem.anchor_bearings)
    angle_vars(truth.segment(a.node * n, n) - a.anchor,
               {a.anchor_id, truth_problem.node_ids[a.node]});
  return out;
}

RefineReport nelder_mead(const std::function<double(const Vec&)>& f,
                         const Vec& x0, int max_evals, double x_tol,
                         double f_tol) {
  const int dim = static_cast<int>(x0.size());
  require(dim >= 1, "nelder_mead: empty start point");

  int evals = 0;
  auto eval = [&](const Vec& x) {
    ++evals;
    return f(x);
  };

  std::vector<Vec> verts;
  std::vector<double> fv;
  auto build_simplex = [&](const Vec& center) {
    verts.assign(1, center);
    fv.assign(1, eval(center));
    for (int i = 0; i < dim; ++i) {
      Vec v = center;
      v[i] = v[i] != 0.0 ? v[i] * 1.05 : 0.00025;
      verts.push_back(v);
      fv.push_back(eval(v));
    }
  };

  build_simplex(x0);
  const double f_start = fv[0];

  bool restarted = false;
  bool converged = false;
  std::vector<int> order(dim + 1);

  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = order[0], worst = order[dim];
    const int second_worst = order[dim - 1];

    double spread_x = 0.0;
    for (int v = 0; v <= dim; ++v)
      spread_x = std::max(
          spread_x, (verts[v] - verts[best]).cwiseAbs().maxCoeff());
    const double spread_f = fv[worst] - fv[best];
    if (spread_x <= x_tol &&
        spread_f <= std::max(f_tol, f_tol * std::abs(fv[best]))) {
      if (restarted) {
        converged = true;
        break;
      }
      // One restart from the incumbent guards against premature collapse.
      restarted = true;
      const Vec keep = verts[best];
      build_simplex(keep);
      continue;
    }

    Vec centroid = Vec::Zero(dim);
    for (int v = 0; v <= dim; ++v)
      if (v != worst) centroid += verts[v];
    centroid /= static_cast<double>(dim);

    const Vec reflected = centroid + (centroid - verts[worst]);
    const double fr = eval(reflected);
    if (fr < fv[best]) {
      const Vec expanded = centroid + 2.0 * (reflected - centroid);
      const double fe = eval(expanded);
      if (fe < fr) {
        verts[worst] = expanded;
        fv[worst] = fe;
      } else {
        verts[worst] = reflected;
        fv[worst] = fr;
      }
    } else if (fr < fv[second_worst]) {
      verts[worst] = reflected;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const Vec contracted = outside
                                 ? centroid + 0.5 * (reflected - centroid)
                                 : centroid + 0.5 * (verts[worst] - centroid);
      const double fc = eval(contracted);
      if (fc < std::min(fr, fv[worst])) {
        verts[worst] = contracted;
        fv[worst] = fc;
      } else {
        for (int v = 0; v <= dim; ++v) {
          if (v == best) continue;
          verts[v] = verts[best] + 0.5 * (verts[v] - verts[best]);
          fv[v] = eval(verts[v]);
        }
      }
    }
  }

  int best = 0;
  for (int v = 1; v <= dim; ++v)
    if (fv[v] < fv[best]) best = v;

  RefineReport report;
  report.x = verts[best];
  report.cost = fv[best];
  report.initial_cost = f_start;
  report.evaluations = evals;
  report.converged = converged;
  return report;
}

namespace {

RefineReport gradient_descent(const std::function<double(const Vec&)>& f,
                              const std::function<Vec(const Vec&)>& grad,
                              const Vec& x0, int max_evals, double x_tol,
                              double f_tol) {
  RefineReport report;
  Vec x = x0;
  double fx = f(x);
  report.initial_cost = fx;
  int evals = 1;

  while (evals < max_evals) {
    const Vec g = grad(x);
    const double gnorm = g.norm();
    if (gnorm <= x_tol) {
      report.converged = true;
      break;
    }
    double step = 1.0 / std::max(gnorm, 1.0);
    bool moved = false;
    for (int backtrack = 0; backtrack < 60 && evals < max_evals;
         ++backtrack) {
      const Vec cand = x - step * g;
      const double fc = f(cand);
      ++evals;
      if (fc <= fx - 1e-4 * step * gnorm * gnorm) {
        const double improvement = fx - fc;
        x = cand;
        fx = fc;
        moved = true;
        if (improvement <= std::max(f_tol, f_tol * std::abs(fx)))
          report.converged = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved || report.converged) break;
  }

  report.x = x;
  report.cost = fx;
  report.evaluations = evals;
  return report;
}

}  // namespace

RefineReport refine(const Vec& x0, const NetworkProblem& problem,
                    const RefineConfig& config,
                    const HuangVariances* variances) {
  require(all_finite(x0), "refine: non-finite start point");
  require(config.max_evals >= 1 && config.x_tol > 0.0 && config.f_tol > 0.0,
          "refine: bad configuration");

  std::function<double(const Vec&)> objective;
  if (config.cost_kind == CostKind::hybrid_ls) {
    objective = [&problem](const Vec& x) {
      return hybrid_cost_network(x, problem);
    };
  } else {
    require(variances != nullptr, "refine: huang_ml requires variances");
    // Points where the likelihood is undefined are treated as infinitely
    // bad so the optimizer backs away from them.
    objective = [&problem, variances](const Vec& x) {
      try {
        return huang_cost(x, problem, *variances);
      } catch (const std::invalid_argument&) {
        return std::numeric_limits<double>::infinity();
      }
    };
  }

  const double f0 = objective(x0);
  require(std::isfinite(f0), "refine: cost not evaluable at start point");

  if (config.method == RefineMethod::simplex)
    return nelder_mead(objective, x0, config.max_evals, config.x_tol,
                       config.f_tol);

  std::function<Vec(const Vec&)> gradient;
  if (config.cost_kind == CostKind::hybrid_ls) {
    gradient = [&problem](const Vec& x) {
      return hybrid_cost_network_gradient(x, problem);
    };
  } else {
    gradient = [objective](const Vec& x) {
      const double h = 1e-6;
      Vec g(x.size());
      Vec probe = x;
      for (int i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double fp = objective(probe);
        probe[i] = x[i] - h;
        const double fm = objective(probe);
        probe[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
      }
      return g;
    };
  }
  return gradient_descent(objective, gradient, x0, config.max_evals,
                          config.x_tol, config.f_tol);
}

}  // namespace hybridloc

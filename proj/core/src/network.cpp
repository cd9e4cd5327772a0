#include "hybridloc/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace hybridloc {

void NetworkProblem::add_node(const NodeId& id) {
  require(!node_index.count(id), "NetworkProblem: duplicate node '" + id + "'");
  node_index[id] = static_cast<int>(node_ids.size());
  node_ids.push_back(id);
}

namespace {
int index_of(const NetworkProblem& p, const NodeId& id) {
  auto it = p.node_index.find(id);
  require(it != p.node_index.end(),
          "NetworkProblem: unknown node '" + id + "'");
  return it->second;
}
}  // namespace

void NetworkProblem::add_range_edge(const NodeId& a, const NodeId& b,
                                    double d) {
  require(a != b, "NetworkProblem: self edge");
  require(std::isfinite(d) && d >= 0.0,
          "NetworkProblem: range must be nonnegative");
  range_edges.push_back({index_of(*this, a), index_of(*this, b), d});
}

void NetworkProblem::add_bearing_edge(const NodeId& from, const NodeId& to,
                                      const Bearing& u) {
  require(from != to, "NetworkProblem: self edge");
  bearing_edges.push_back({index_of(*this, to), index_of(*this, from), u});
}

void NetworkProblem::add_anchor_range(const NodeId& node,
                                      const NodeId& anchor_id,
                                      const Vec& anchor, double d) {
  require(std::isfinite(d) && d >= 0.0,
          "NetworkProblem: range must be nonnegative");
  anchor_ranges.push_back({index_of(*this, node), anchor, d, anchor_id});
}

void NetworkProblem::add_anchor_bearing(const NodeId& node,
                                        const NodeId& anchor_id,
                                        const Vec& anchor, const Bearing& u) {
  anchor_bearings.push_back({index_of(*this, node), anchor, u, anchor_id});
}

std::vector<int> NetworkProblem::isolated_nodes() const {
  std::vector<bool> touched(node_ids.size(), false);
  for (const auto& e : range_edges) touched[e.i] = touched[e.j] = true;
  for (const auto& e : bearing_edges) touched[e.i] = touched[e.j] = true;
  for (const auto& a : anchor_ranges) touched[a.node] = true;
  for (const auto& a : anchor_bearings) touched[a.node] = true;
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(touched.size()); ++i)
    if (!touched[i]) out.push_back(i);
  return out;
}

std::pair<Vec, Vec> NetworkProblem::anchor_bounding_box() const {
  Vec lo = Vec::Zero(n), hi = Vec::Ones(n);
  bool first = true;
  auto fold = [&](const Vec& a) {
    if (first) {
      lo = a;
      hi = a;
      first = false;
    } else {
      lo = lo.cwiseMin(a);
      hi = hi.cwiseMax(a);
    }
  };
  for (const auto& ar : anchor_ranges) fold(ar.anchor);
  for (const auto& ab : anchor_bearings) fold(ab.anchor);
  if (!first && (hi - lo).maxCoeff() < 1e-9) {
    // Collapse to a point: widen so sampling stays meaningful.
    lo.array() -= 0.5;
    hi.array() += 0.5;
  }
  return {lo, hi};
}

void NetworkProblem::validate() const {
  require(n >= 2, "NetworkProblem: dimension must be at least 2");
  require(!node_ids.empty(), "NetworkProblem: no unknown nodes");
  std::set<std::pair<int, int>> seen_r, seen_b;
  for (const auto& e : range_edges) {
    auto key = std::minmax(e.i, e.j);
    require(seen_r.insert(key).second,
            "NetworkProblem: duplicate range edge");
  }
  for (const auto& e : bearing_edges) {
    auto key = std::minmax(e.i, e.j);
    require(seen_b.insert(key).second,
            "NetworkProblem: duplicate bearing edge");
    require(e.u.dim() == n, "NetworkProblem: bearing dimension mismatch");
  }
  for (const auto& a : anchor_ranges)
    require(a.anchor.size() == n, "NetworkProblem: anchor dimension mismatch");
  for (const auto& a : anchor_bearings) {
    require(a.anchor.size() == n, "NetworkProblem: anchor dimension mismatch");
    require(a.u.dim() == n, "NetworkProblem: bearing dimension mismatch");
  }
}

double hybrid_cost_network(const Vec& x, const NetworkProblem& problem) {
  const int n = problem.n;
  require(x.size() == problem.num_nodes() * n,
          "hybrid_cost_network: stacked position size mismatch");
  double cost = 0.0;
  for (const auto& e : problem.range_edges)
    cost += dist2_sphere(x.segment(e.i * n, n) - x.segment(e.j * n, n), e.d);
  for (const auto& e : problem.bearing_edges)
    cost += dist2_line(x.segment(e.i * n, n) - x.segment(e.j * n, n), e.u);
  for (const auto& a : problem.anchor_ranges)
    cost += dist2_sphere(x.segment(a.node * n, n) - a.anchor, a.d);
  for (const auto& a : problem.anchor_bearings)
    cost += dist2_line(x.segment(a.node * n, n) - a.anchor, a.u);
  return cost;
}

Vec hybrid_cost_network_gradient(const Vec& x, const NetworkProblem& problem) {
  const int n = problem.n;
  require(x.size() == problem.num_nodes() * n,
          "hybrid_cost_network_gradient: stacked position size mismatch");
  Vec grad = Vec::Zero(x.size());

  auto sphere_grad = [](const Vec& z, double d) -> Vec {
    const double norm = z.norm();
    if (norm < 1e-300) return Vec::Zero(z.size());  // subgradient at center
    return 2.0 * (norm - d) / norm * z;
  };

  for (const auto& e : problem.range_edges) {
    const Vec z = x.segment(e.i * n, n) - x.segment(e.j * n, n);
    const Vec g = sphere_grad(z, e.d);
    grad.segment(e.i * n, n) += g;
    grad.segment(e.j * n, n) -= g;
  }
  for (const auto& e : problem.bearing_edges) {
    const Vec z = x.segment(e.i * n, n) - x.segment(e.j * n, n);
    const Vec g = 2.0 * (z - project_line(z, e.u));
    grad.segment(e.i * n, n) += g;
    grad.segment(e.j * n, n) -= g;
  }
  for (const auto& a : problem.anchor_ranges) {
    const Vec z = x.segment(a.node * n, n) - a.anchor;
    grad.segment(a.node * n, n) += sphere_grad(z, a.d);
  }
  for (const auto& a : problem.anchor_bearings) {
    const Vec z = x.segment(a.node * n, n) - a.anchor;
    grad.segment(a.node * n, n) += 2.0 * (z - project_line(z, a.u));
  }
  return grad;
}

}  // namespace hybridloc

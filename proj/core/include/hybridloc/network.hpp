#pragma once

#include <map>
#include <string>
#include <vector>

#include "hybridloc/geometry.hpp"

namespace hybridloc {

/// Measurement graph for cooperative localization: unknown nodes,
/// known anchors, internode edges and node-anchor measurements.
/// Node indices follow the order in `node_ids`.
struct NetworkProblem {
  struct RangeEdge {
    int i = 0, j = 0;
    double d = 0.0;
  };
  struct BearingEdge {
    int i = 0, j = 0;  // u points from x_j toward x_i
    Bearing u;
  };
  struct AnchorRange {
    int node = 0;
    Vec anchor;
    double d = 0.0;
    NodeId anchor_id;
  };
  struct AnchorBearing {
    int node = 0;
    Vec anchor;  // u points from the anchor toward the node
    Bearing u;
    NodeId anchor_id;
  };

  int n = 0;
  std::vector<NodeId> node_ids;
  std::map<NodeId, int> node_index;
  std::vector<RangeEdge> range_edges;
  std::vector<BearingEdge> bearing_edges;
  std::vector<AnchorRange> anchor_ranges;
  std::vector<AnchorBearing> anchor_bearings;

  int num_nodes() const { return static_cast<int>(node_ids.size()); }

  void add_node(const NodeId& id);
  void add_range_edge(const NodeId& a, const NodeId& b, double d);
  void add_bearing_edge(const NodeId& from, const NodeId& to,
                        const Bearing& u);
  void add_anchor_range(const NodeId& node, const NodeId& anchor_id,
                        const Vec& anchor, double d);
  void add_anchor_bearing(const NodeId& node, const NodeId& anchor_id,
                          const Vec& anchor, const Bearing& u);

  /// Nodes with no measurements of any kind (positions unidentifiable).
  std::vector<int> isolated_nodes() const;

  /// Smallest axis-aligned box containing all anchors (used for the
  /// random initialization of iterative solvers). Unit box when there
  /// are no anchors.
  std::pair<Vec, Vec> anchor_bounding_box() const;

  void validate() const;
};

/// Nonconvex hybrid network cost: squared sphere distances for range
/// terms, squared line distances for bearing terms, summed over
/// internode edges and node-anchor measurements. `x` stacks node
/// positions in node_ids order.
double hybrid_cost_network(const Vec& x, const NetworkProblem& problem);

/// Gradient of hybrid_cost_network (subgradient zero at sphere centers).
Vec hybrid_cost_network_gradient(const Vec& x, const NetworkProblem& problem);

}  // namespace hybridloc

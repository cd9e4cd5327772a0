#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hybridloc/common.hpp"

namespace hybridloc {

enum class AnchorKind { range, visual };
enum class MeasType { range, bearing };

struct ScenarioAnchor {
  NodeId id;
  Vec pos;
  AnchorKind kind = AnchorKind::range;
};

struct ScenarioNode {
  NodeId id;
  Vec pos;
};

struct ScenarioEdge {
  NodeId from;
  NodeId to;
  std::vector<MeasType> types;
};

/// Ground-truth geometry plus measurement topology. Anchor kinds decide
/// which measurement a node-anchor edge produces; edge `types` list the
/// measurements taken on that edge.
struct Scenario {
  int dim = 0;
  std::vector<ScenarioAnchor> anchors;
  std::vector<ScenarioNode> nodes;
  std::vector<ScenarioEdge> edges;

  const ScenarioAnchor* find_anchor(const NodeId& id) const;
  const ScenarioNode* find_node(const NodeId& id) const;
  int count_anchors(AnchorKind kind) const;

  /// Stacked true node positions, file order.
  Vec truth_stacked() const;

  void validate() const;
};

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const std::string& path, const Scenario& scenario);
Scenario load_scenario(const std::string& path);

enum class ScenarioKind { single_source_random, cooperative_canned };

struct ScenarioCounts {
  int range_anchors = 8;
  int visual_anchors = 4;
  int sensors = 1;
};

/// Uniform random single-source layout in the unit box: every anchor
/// measures the one source, ranges from range anchors and bearings from
/// visual anchors.
Scenario generate_single_source(int dim, const ScenarioCounts& counts,
                                std::uint64_t seed);

/// Random cooperative layout in the unit box. Sensors connect to anchors
/// and to each other within a connectivity radius (widened until every
/// sensor has a minimum degree); internode edges carry both measurement
/// types.
Scenario generate_cooperative(int dim, const ScenarioCounts& counts,
                              std::uint64_t seed,
                              double connect_radius = 0.0);

/// Directory of pre-generated localizable networks described by
/// manifest.json.
class ScenarioLibrary {
 public:
  explicit ScenarioLibrary(std::string dir);

  /// All scenario files matching dimension, total anchor count and
  /// sensor count, manifest order.
  std::vector<std::string> match(int dim, int anchors, int sensors) const;

  /// All scenario files with the given manifest tag.
  std::vector<std::string> match_tag(const std::string& tag) const;

  Scenario load(const std::string& file) const;

 private:
  struct Entry {
    std::string file;
    int dim = 0;
    int anchors = 0;
    int sensors = 0;
    std::string tag;
  };
  std::string dir_;
  std::vector<Entry> entries_;
};

/// Dispatch on kind: random generation, or the seed-indexed variant of
/// the canned set (which requires a library).
Scenario generate_scenario(ScenarioKind kind, int dim,
                           const ScenarioCounts& counts, std::uint64_t seed,
                           const ScenarioLibrary* library = nullptr);

}  // namespace hybridloc

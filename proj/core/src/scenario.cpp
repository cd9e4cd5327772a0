#include "hybridloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "hybridloc/random.hpp"

namespace hybridloc {

using nlohmann::json;

const ScenarioAnchor* Scenario::find_anchor(const NodeId& id) const {
  for (const auto& a : anchors)
    if (a.id == id) return &a;
  return nullptr;
}

const ScenarioNode* Scenario::find_node(const NodeId& id) const {
  for (const auto& s : nodes)
    if (s.id == id) return &s;
  return nullptr;
}

int Scenario::count_anchors(AnchorKind kind) const {
  int c = 0;
  for (const auto& a : anchors)
    if (a.kind == kind) ++c;
  return c;
}

Vec Scenario::truth_stacked() const {
  Vec x(static_cast<int>(nodes.size()) * dim);
  for (size_t i = 0; i < nodes.size(); ++i)
    x.segment(static_cast<int>(i) * dim, dim) = nodes[i].pos;
  return x;
}

void Scenario::validate() const {
  require(dim >= 2, "Scenario: dim must be at least 2");
  std::set<NodeId> ids;
  for (const auto& a : anchors) {
    require(a.pos.size() == dim, "Scenario: anchor dimension mismatch");
    require(all_finite(a.pos), "Scenario: anchor position must be finite");
    require(ids.insert(a.id).second, "Scenario: duplicate id '" + a.id + "'");
  }
  for (const auto& s : nodes) {
    require(s.pos.size() == dim, "Scenario: node dimension mismatch");
    require(all_finite(s.pos), "Scenario: node position must be finite");
    require(ids.insert(s.id).second, "Scenario: duplicate id '" + s.id + "'");
  }
  for (const auto& e : edges) {
    require(ids.count(e.from), "Scenario: edge references unknown id '" +
                                   e.from + "'");
    require(ids.count(e.to),
            "Scenario: edge references unknown id '" + e.to + "'");
    require(e.from != e.to, "Scenario: self edge");
    require(!e.types.empty(), "Scenario: edge without measurement types");
  }
}

namespace {

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec vec_from_json(const json& arr) {
  Vec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr.at(i);
  return v;
}

}  // namespace

std::string scenario_to_json(const Scenario& scenario) {
  json doc;
  doc["dim"] = scenario.dim;
  doc["anchors"] = json::array();
  for (const auto& a : scenario.anchors) {
    doc["anchors"].push_back(
        {{"id", a.id},
         {"pos", vec_to_json(a.pos)},
         {"kind", a.kind == AnchorKind::range ? "range" : "visual"}});
  }
  doc["nodes"] = json::array();
  for (const auto& s : scenario.nodes)
    doc["nodes"].push_back({{"id", s.id}, {"pos", vec_to_json(s.pos)}});
  doc["edges"] = json::array();
  for (const auto& e : scenario.edges) {
    json types = json::array();
    for (MeasType t : e.types)
      types.push_back(t == MeasType::range ? "range" : "bearing");
    doc["edges"].push_back(
        {{"from", e.from}, {"to", e.to}, {"types", types}});
  }
  return doc.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  const json doc = json::parse(text);
  Scenario sc;
  sc.dim = doc.at("dim").get<int>();
  for (const auto& item : doc.at("anchors")) {
    ScenarioAnchor a;
    a.id = item.at("id").get<std::string>();
    a.pos = vec_from_json(item.at("pos"));
    const std::string kind = item.at("kind").get<std::string>();
    require(kind == "range" || kind == "visual",
            "scenario: unknown anchor kind '" + kind + "'");
    a.kind = kind == "range" ? AnchorKind::range : AnchorKind::visual;
    sc.anchors.push_back(std::move(a));
  }
  for (const auto& item : doc.at("nodes")) {
    ScenarioNode s;
    s.id = item.at("id").get<std::string>();
    s.pos = vec_from_json(item.at("pos"));
    sc.nodes.push_back(std::move(s));
  }
  for (const auto& item : doc.at("edges")) {
    ScenarioEdge e;
    e.from = item.at("from").get<std::string>();
    e.to = item.at("to").get<std::string>();
    for (const auto& t : item.at("types")) {
      const std::string name = t.get<std::string>();
      require(name == "range" || name == "bearing",
              "scenario: unknown measurement type '" + name + "'");
      e.types.push_back(name == "range" ? MeasType::range
                                        : MeasType::bearing);
    }
    sc.edges.push_back(std::move(e));
  }
  sc.validate();
  return sc;
}

void save_scenario(const std::string& path, const Scenario& scenario) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  out << scenario_to_json(scenario) << "\n";
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return scenario_from_json(text);
}

namespace {

Vec random_point(RandomStream& rng, int dim) {
  Vec p(dim);
  for (int c = 0; c < dim; ++c) p[c] = rng.next_uniform();
  return p;
}

}  // namespace

Scenario generate_single_source(int dim, const ScenarioCounts& counts,
                                std::uint64_t seed) {
  require(dim >= 2, "generate_single_source: dim must be at least 2");
  require(counts.range_anchors + counts.visual_anchors >= 1,
          "generate_single_source: at least one anchor required");
  RandomStream rng(stream_key(seed, {0x7363656e}));  // "scen"

  Scenario sc;
  sc.dim = dim;
  int next = 0;
  for (int k = 0; k < counts.range_anchors; ++k)
    sc.anchors.push_back({"a" + std::to_string(next++), random_point(rng, dim),
                          AnchorKind::range});
  for (int k = 0; k < counts.visual_anchors; ++k)
    sc.anchors.push_back({"a" + std::to_string(next++), random_point(rng, dim),
                          AnchorKind::visual});
  sc.nodes.push_back({"s0", random_point(rng, dim)});
  for (const auto& a : sc.anchors) {
    const MeasType type =
        a.kind == AnchorKind::range ? MeasType::range : MeasType::bearing;
    sc.edges.push_back({a.id, "s0", {type}});
  }
  return sc;
}

Scenario generate_cooperative(int dim, const ScenarioCounts& counts,
                              std::uint64_t seed, double connect_radius) {
  require(dim >= 2, "generate_cooperative: dim must be at least 2");
  require(counts.sensors >= 2, "generate_cooperative: at least two sensors");
  require(counts.range_anchors + counts.visual_anchors >= 1,
          "generate_cooperative: at least one anchor required");
  RandomStream rng(stream_key(seed, {0x636f6f70}));  // "coop"

  Scenario sc;
  sc.dim = dim;
  int next = 0;
  for (int k = 0; k < counts.range_anchors; ++k)
    sc.anchors.push_back({"a" + std::to_string(next++), random_point(rng, dim),
                          AnchorKind::range});
  for (int k = 0; k < counts.visual_anchors; ++k)
    sc.anchors.push_back({"a" + std::to_string(next++), random_point(rng, dim),
                          AnchorKind::visual});
  for (int s = 0; s < counts.sensors; ++s)
    sc.nodes.push_back({"s" + std::to_string(s), random_point(rng, dim)});

  double radius = connect_radius > 0.0
                      ? connect_radius
                      : (dim == 2 ? 0.65 : 0.85);
  const int min_anchor_degree =
      std::min(3, counts.range_anchors + counts.visual_anchors);

  // Widen connectivity until every sensor sees enough anchors; the
  // localizability screen downstream rejects layouts this cannot fix.
  for (;; radius *= 1.25) {
    sc.edges.clear();
    bool ok = true;
    for (const auto& node : sc.nodes) {
      int degree = 0;
      for (const auto& a : sc.anchors) {
        if ((node.pos - a.pos).norm() > radius) continue;
        const MeasType type = a.kind == AnchorKind::range
                                  ? MeasType::range
                                  : MeasType::bearing;
        sc.edges.push_back({a.id, node.id, {type}});
        ++degree;
      }
      if (degree < min_anchor_degree) ok = false;
    }
    for (size_t i = 0; i < sc.nodes.size(); ++i)
      for (size_t j = i + 1; j < sc.nodes.size(); ++j)
        if ((sc.nodes[i].pos - sc.nodes[j].pos).norm() <= radius)
          sc.edges.push_back({sc.nodes[i].id, sc.nodes[j].id,
                              {MeasType::range, MeasType::bearing}});
    if (ok || radius > 4.0) break;
  }
  return sc;
}

ScenarioLibrary::ScenarioLibrary(std::string dir) : dir_(std::move(dir)) {
  std::ifstream in(dir_ + "/manifest.json");
  if (!in)
    throw IoError("cannot open scenario manifest in " + dir_);
  const json doc = json::parse(in);
  for (const auto& item : doc.at("scenarios")) {
    Entry e;
    e.file = item.at("file").get<std::string>();
    e.dim = item.at("dim").get<int>();
    e.anchors = item.at("anchors").get<int>();
    e.sensors = item.at("sensors").get<int>();
    e.tag = item.value("tag", "");
    entries_.push_back(std::move(e));
  }
}

std::vector<std::string> ScenarioLibrary::match(int dim, int anchors,
                                                int sensors) const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.dim == dim && e.anchors == anchors && e.sensors == sensors)
      out.push_back(e.file);
  return out;
}

std::vector<std::string> ScenarioLibrary::match_tag(
    const std::string& tag) const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.tag == tag) out.push_back(e.file);
  return out;
}

Scenario ScenarioLibrary::load(const std::string& file) const {
  return load_scenario(dir_ + "/" + file);
}

Scenario generate_scenario(ScenarioKind kind, int dim,
                           const ScenarioCounts& counts, std::uint64_t seed,
                           const ScenarioLibrary* library) {
  switch (kind) {
    case ScenarioKind::single_source_random:
      return generate_single_source(dim, counts, seed);
    case ScenarioKind::cooperative_canned: {
      require(library != nullptr,
              "generate_scenario: canned scenarios need a library");
      const auto files = library->match(
          dim, counts.range_anchors + counts.visual_anchors, counts.sensors);
      require(!files.empty(),
              "generate_scenario: no canned scenario matches the request");
      return library->load(files[seed % files.size()]);
    }
  }
  throw std::invalid_argument("generate_scenario: unknown kind");
}

}  // namespace hybridloc

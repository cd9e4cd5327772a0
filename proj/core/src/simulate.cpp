#include "hybridloc/simulate.hpp"

#include <fstream>

#include <json.hpp>

#include "hybridloc/random.hpp"

namespace hybridloc {

using nlohmann::json;

namespace {

const Vec& position_of(const Scenario& scenario, const NodeId& id) {
  if (const auto* a = scenario.find_anchor(id)) return a->pos;
  if (const auto* s = scenario.find_node(id)) return s->pos;
  throw std::invalid_argument("scenario: unknown id '" + id + "'");
}

}  // namespace

EdgeDraws draw_edge_noise(const Scenario& scenario, const NoiseModel& noise) {
  scenario.validate();
  require(noise.eta >= 0.0, "draw_edge_noise: eta must be nonnegative");
  RandomStream rng(stream_key(noise.seed, {0x6e6f6973}));  // "nois"

  EdgeDraws draws;
  draws.delta.reserve(scenario.edges.size());
  for (const auto& edge : scenario.edges) {
    const Vec delta0 =
        position_of(scenario, edge.to) - position_of(scenario, edge.from);
    const double sigma = noise.eta * delta0.norm();
    Vec delta = delta0;
    do {
      for (int c = 0; c < scenario.dim; ++c)
        delta[c] = delta0[c] + sigma * rng.next_gaussian();
    } while (delta.norm() == 0.0);  // probability-zero guard
    draws.delta.push_back(std::move(delta));
  }
  return draws;
}

MeasurementSet measurements_from_draws(const Scenario& scenario,
                                       const EdgeDraws& draws,
                                       bool all_range) {
  require(draws.delta.size() == scenario.edges.size(),
          "measurements_from_draws: draws do not match scenario edges");
  MeasurementSet out;
  for (size_t e = 0; e < scenario.edges.size(); ++e) {
    const auto& edge = scenario.edges[e];
    const Vec& delta = draws.delta[e];
    if (all_range) {
      out.ranges.emplace_back(edge.from, edge.to, delta.norm());
      continue;
    }
    for (MeasType type : edge.types) {
      if (type == MeasType::range) {
        out.ranges.emplace_back(edge.from, edge.to, delta.norm());
      } else {
        out.bearings.emplace_back(edge.from, edge.to,
                                  Bearing(delta / delta.norm()));
      }
    }
  }
  return out;
}

MeasurementSet synthesize_measurements(const Scenario& scenario,
                                       const NoiseModel& noise) {
  return measurements_from_draws(scenario, draw_edge_noise(scenario, noise));
}

namespace {

NetworkProblem build_problem(const Scenario& scenario,
                             const MeasurementSet& measurements,
                             bool keep_internode) {
  NetworkProblem problem;
  problem.n = scenario.dim;
  for (const auto& node : scenario.nodes) problem.add_node(node.id);

  auto is_node = [&](const NodeId& id) {
    return scenario.find_node(id) != nullptr;
  };

  for (const auto& r : measurements.ranges) {
    const bool from_node = is_node(r.observer);
    const bool to_node = is_node(r.target);
    if (from_node && to_node) {
      if (keep_internode) problem.add_range_edge(r.observer, r.target, r.distance);
    } else if (from_node || to_node) {
      const NodeId node = from_node ? r.observer : r.target;
      const NodeId anchor = from_node ? r.target : r.observer;
      const auto* a = scenario.find_anchor(anchor);
      require(a != nullptr, "measurements: unknown anchor '" + anchor + "'");
      problem.add_anchor_range(node, anchor, a->pos, r.distance);
    } else {
      throw std::invalid_argument(
          "measurements: range between two anchors is not usable");
    }
  }
  for (const auto& b : measurements.bearings) {
    const bool from_node = is_node(b.observer);
    const bool to_node = is_node(b.target);
    if (from_node && to_node) {
      if (keep_internode) problem.add_bearing_edge(b.observer, b.target, b.bearing);
    } else if (from_node || to_node) {
      const NodeId node = from_node ? b.observer : b.target;
      const NodeId anchor = from_node ? b.target : b.observer;
      const auto* a = scenario.find_anchor(anchor);
      require(a != nullptr, "measurements: unknown anchor '" + anchor + "'");
      // Canonical orientation is anchor-to-node.
      const Bearing u = from_node ? b.bearing.flipped() : b.bearing;
      problem.add_anchor_bearing(node, anchor, a->pos, u);
    } else {
      throw std::invalid_argument(
          "measurements: bearing between two anchors is not usable");
    }
  }
  problem.validate();
  return problem;
}

}  // namespace

NetworkProblem make_network_problem(const Scenario& scenario,
                                    const MeasurementSet& measurements) {
  return build_problem(scenario, measurements, true);
}

NetworkProblem make_network_problem_no_internode(
    const Scenario& scenario, const MeasurementSet& measurements) {
  return build_problem(scenario, measurements, false);
}

FlorisProblem make_floris_problem(const Scenario& scenario,
                                  const MeasurementSet& measurements) {
  require(scenario.nodes.size() == 1,
          "make_floris_problem: single-source scenarios only");
  std::map<NodeId, Vec> anchors;
  for (const auto& a : scenario.anchors) anchors[a.id] = a.pos;
  return floris_from_measurements(anchors, scenario.nodes[0].id,
                                  measurements.ranges, measurements.bearings);
}

void save_measurements(const std::string& path, const Scenario& scenario,
                       const MeasurementSet& measurements, double eta,
                       std::uint64_t seed) {
  json doc;
  doc["format"] = "hybridloc-measurements";
  doc["version"] = 1;
  doc["eta"] = eta;
  doc["seed"] = seed;
  doc["scenario"] = json::parse(scenario_to_json(scenario));
  doc["ranges"] = json::array();
  for (const auto& r : measurements.ranges)
    doc["ranges"].push_back(
        {{"from", r.observer}, {"to", r.target}, {"d", r.distance}});
  doc["bearings"] = json::array();
  for (const auto& b : measurements.bearings) {
    json u = json::array();
    for (int c = 0; c < b.bearing.dim(); ++c)
      u.push_back(b.bearing.direction()[c]);
    doc["bearings"].push_back(
        {{"from", b.observer}, {"to", b.target}, {"u", u}});
  }
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write measurement file: " + path);
  out << doc.dump(2) << "\n";
}

MeasurementFile load_measurements(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open measurement file: " + path);
  const json doc = json::parse(in);
  require(doc.value("format", "") == "hybridloc-measurements",
          "measurement file: unrecognized format");

  MeasurementFile file;
  file.eta = doc.value("eta", 0.0);
  file.seed = doc.value("seed", std::uint64_t{0});
  file.scenario = scenario_from_json(doc.at("scenario").dump());
  for (const auto& item : doc.at("ranges"))
    file.measurements.ranges.emplace_back(item.at("from").get<std::string>(),
                                          item.at("to").get<std::string>(),
                                          item.at("d").get<double>());
  for (const auto& item : doc.at("bearings")) {
    Vec u(item.at("u").size());
    for (size_t c = 0; c < item.at("u").size(); ++c)
      u[static_cast<int>(c)] = item.at("u").at(c).get<double>();
    file.measurements.bearings.emplace_back(
        item.at("from").get<std::string>(), item.at("to").get<std::string>(),
        Bearing(u));
  }
  return file;
}

}  // namespace hybridloc

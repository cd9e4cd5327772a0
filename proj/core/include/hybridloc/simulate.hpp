#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hybridloc/floris.hpp"
#include "hybridloc/network.hpp"
#include "hybridloc/scenario.hpp"

namespace hybridloc {

/// Multiplicative-in-distance Gaussian perturbation: each true
/// displacement delta0 is corrupted as delta = delta0 + w with
/// w ~ N(0, eta^2 |delta0|^2 I) before ranges and bearings are read off.
struct NoiseModel {
  double eta = 0.0;
  std::uint64_t seed = 0;
};

struct MeasurementSet {
  std::vector<RangeMeasurement> ranges;
  std::vector<BearingMeasurement> bearings;
};

/// Perturbed displacement per edge, file order. Ranges and bearings on
/// the same edge both derive from the one draw.
struct EdgeDraws {
  std::vector<Vec> delta;  // parallel to scenario.edges
};

EdgeDraws draw_edge_noise(const Scenario& scenario, const NoiseModel& noise);

/// Materialize measurements from draws. With `all_range` set, every edge
/// yields a range measurement regardless of declared types (the paired
/// range-only baseline).
MeasurementSet measurements_from_draws(const Scenario& scenario,
                                       const EdgeDraws& draws,
                                       bool all_range = false);

MeasurementSet synthesize_measurements(const Scenario& scenario,
                                       const NoiseModel& noise);

/// Assemble the cooperative problem: anchor edges become node-anchor
/// terms, node-node edges become internode terms, bearings oriented so
/// the stored direction matches the perturbed displacement convention.
NetworkProblem make_network_problem(const Scenario& scenario,
                                    const MeasurementSet& measurements);

/// Drop internode measurements, keeping only node-anchor terms
/// (independent per-node solving on a cooperative scenario).
NetworkProblem make_network_problem_no_internode(
    const Scenario& scenario, const MeasurementSet& measurements);

/// Single-source view of a one-node scenario.
FlorisProblem make_floris_problem(const Scenario& scenario,
                                  const MeasurementSet& measurements);

/// Measurement file: scenario embedded alongside the measurement lists
/// so a solve run needs a single input.
void save_measurements(const std::string& path, const Scenario& scenario,
                       const MeasurementSet& measurements, double eta,
                       std::uint64_t seed);

struct MeasurementFile {
  Scenario scenario;
  MeasurementSet measurements;
  double eta = 0.0;
  std::uint64_t seed = 0;
};

MeasurementFile load_measurements(const std::string& path);

}  // namespace hybridloc

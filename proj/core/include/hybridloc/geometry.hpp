#pragma once

#include <map>
#include <utility>
#include <vector>

#include "hybridloc/common.hpp"

namespace hybridloc {

// Relative tolerance for accepting an input direction as unit-norm.
// Vectors within this band are renormalized on ingestion; anything
// further off is rejected.
inline constexpr double kBearingNormTol = 1e-9;

struct Position {
  Vec coords;

  Position() = default;
  explicit Position(Vec c);

  int dim() const { return static_cast<int>(coords.size()); }
};

/// Unit direction in the global frame.
class Bearing {
 public:
  Bearing() = default;
  explicit Bearing(Vec direction);

  const Vec& direction() const { return dir_; }
  int dim() const { return static_cast<int>(dir_.size()); }

  Bearing flipped() const;

 private:
  Vec dir_;
};

struct RangeMeasurement {
  NodeId observer;
  NodeId target;
  double distance = 0.0;

  RangeMeasurement() = default;
  RangeMeasurement(NodeId obs, NodeId tgt, double d);
};

struct BearingMeasurement {
  NodeId observer;
  NodeId target;
  Bearing bearing;  // unit vector from observer toward target, global frame

  BearingMeasurement() = default;
  BearingMeasurement(NodeId obs, NodeId tgt, Bearing b);
};

/// Orthogonal projection of z onto the origin-centered ball of given radius.
Vec project_ball(const Vec& z, double radius);

/// Orthogonal projection of z onto the line through the origin along u.
Vec project_line(const Vec& z, const Bearing& u);

/// Squared distance of z to the origin-centered sphere of given radius.
double dist2_sphere(const Vec& z, double radius);

/// Squared distance of z to the origin-centered ball (zero inside).
double dist2_ball(const Vec& z, double radius);

/// Squared distance of z to the line through the origin along u,
/// i.e. z' (I - u u') z.
double dist2_line(const Vec& z, const Bearing& u);

/// Single-source hybrid least-squares cost: sum of squared sphere
/// distances over range anchors plus squared line distances over
/// bearing anchors. Measurements reference anchors by observer id.
double hybrid_cost_single(const Vec& x, const std::map<NodeId, Vec>& anchors,
                          const std::vector<RangeMeasurement>& ranges,
                          const std::vector<BearingMeasurement>& bearings);

}  // namespace hybridloc

#include "hybridloc/geometry.hpp"

#include <cmath>

namespace hybridloc {

Position::Position(Vec c) : coords(std::move(c)) {
  require(coords.size() >= 2, "Position: dimension must be at least 2");
  require(all_finite(coords), "Position: coordinates must be finite");
}

Bearing::Bearing(Vec direction) : dir_(std::move(direction)) {
  require(dir_.size() >= 1, "Bearing: empty direction");
  require(all_finite(dir_), "Bearing: direction must be finite");
  const double norm = dir_.norm();
  require(std::abs(norm - 1.0) <= kBearingNormTol,
          "Bearing: direction is not unit-norm");
  // File round-tripping loses digits; snap back onto the sphere.
  dir_ /= norm;
}

Bearing Bearing::flipped() const {
  Bearing b;
  b.dir_ = -dir_;
  return b;
}

RangeMeasurement::RangeMeasurement(NodeId obs, NodeId tgt, double d)
    : observer(std::move(obs)), target(std::move(tgt)), distance(d) {
  require(observer != target, "RangeMeasurement: observer equals target");
  require(std::isfinite(distance) && distance >= 0.0,
          "RangeMeasurement: distance must be nonnegative");
}

BearingMeasurement::BearingMeasurement(NodeId obs, NodeId tgt, Bearing b)
    : observer(std::move(obs)), target(std::move(tgt)), bearing(std::move(b)) {
  require(observer != target, "BearingMeasurement: observer equals target");
}

Vec project_ball(const Vec& z, double radius) {
  require(all_finite(z), "project_ball: non-finite input");
  require(std::isfinite(radius) && radius >= 0.0,
          "project_ball: radius must be nonnegative");
  const double norm = z.norm();
  if (norm <= radius) return z;
  if (norm == 0.0) return z;  // radius == 0 and z at the origin
  return z * (radius / norm);
}

Vec project_line(const Vec& z, const Bearing& u) {
  require(all_finite(z), "project_line: non-finite input");
  require(z.size() == u.dim(), "project_line: dimension mismatch");
  const Vec& d = u.direction();
  return d * d.dot(z);
}

double dist2_sphere(const Vec& z, double radius) {
  require(all_finite(z), "dist2_sphere: non-finite input");
  require(std::isfinite(radius) && radius >= 0.0,
          "dist2_sphere: radius must be nonnegative");
  const double r = z.norm() - radius;
  return r * r;
}

double dist2_ball(const Vec& z, double radius) {
  require(all_finite(z), "dist2_ball: non-finite input");
  require(std::isfinite(radius) && radius >= 0.0,
          "dist2_ball: radius must be nonnegative");
  const double excess = z.norm() - radius;
  return excess > 0.0 ? excess * excess : 0.0;
}

double dist2_line(const Vec& z, const Bearing& u) {
  require(all_finite(z), "dist2_line: non-finite input");
  require(z.size() == u.dim(), "dist2_line: dimension mismatch");
  const double along = u.direction().dot(z);
  const double d2 = z.squaredNorm() - along * along;
  return d2 > 0.0 ? d2 : 0.0;
}

double hybrid_cost_single(const Vec& x, const std::map<NodeId, Vec>& anchors,
                          const std::vector<RangeMeasurement>& ranges,
                          const std::vector<BearingMeasurement>& bearings) {
  require(all_finite(x), "hybrid_cost_single: non-finite position");
  double cost = 0.0;
  for (const auto& r : ranges) {
    auto it = anchors.find(r.observer);
    require(it != anchors.end(),
            "hybrid_cost_single: unknown anchor '" + r.observer + "'");
    cost += dist2_sphere(x - it->second, r.distance);
  }
  for (const auto& b : bearings) {
    auto it = anchors.find(b.observer);
    require(it != anchors.end(),
            "hybrid_cost_single: unknown anchor '" + b.observer + "'");
    cost += dist2_line(x - it->second, b.bearing);
  }
  return cost;
}

}  // namespace hybridloc

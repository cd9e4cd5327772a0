#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace hybridloc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using NodeId = std::string;

/// Geometry does not determine the quantity being estimated
/// (collinear Procrustes data, rank-deficient pose sets, ...).
class DegenerateGeometryError : public std::runtime_error {
 public:
  explicit DegenerateGeometryError(const std::string& what)
      : std::runtime_error(what) {}
};

/// An iterative routine failed to reach its numerical target.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// No pose chain connects the query to a calibrated visual anchor.
class NoBearingAvailableError : public std::runtime_error {
 public:
  explicit NoBearingAvailableError(const std::string& what)
      : std::runtime_error(what) {}
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace hybridloc

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "hybridloc/geometry.hpp"

namespace hybridloc {

/// One calibration observation: a range-based position estimate of the
/// target in the global frame paired with the camera pose measured in
/// the visual-anchor frame.
struct PoseSample {
  Eigen::Vector3d x_r = Eigen::Vector3d::Zero();
  Eigen::Matrix3d R_v = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t_v = Eigen::Vector3d::Zero();

  void validate() const;
};

struct CalibrationResult {
  Eigen::Matrix3d R_g_v = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t_g_v = Eigen::Vector3d::Zero();
  Eigen::Vector3d t_0 = Eigen::Vector3d::Zero();
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // pairwise LS objective per iteration
};

struct PoseDiff {
  Eigen::Vector3d x_r;
  Eigen::Matrix3d R_v;
  Eigen::Vector3d t_v;
};

/// Default: all unordered pairs for small sample sets, consecutive pairs
/// plus a seeded random selection capped at `cap` otherwise.
struct PairPolicy {
  enum class Mode { automatic, all_pairs };
  Mode mode = Mode::automatic;
  int cap = 300;
  std::uint64_t seed = 0;
};

std::vector<PoseDiff> pairwise_differences(
    const std::vector<PoseSample>& samples, const PairPolicy& policy = {});

/// Special-orthogonal R minimizing sum ||p_l - R q_l||^2 over paired
/// point sets, via SVD of the cross-covariance with a determinant
/// correction.
Eigen::Matrix3d procrustes(const std::vector<Eigen::Vector3d>& P,
                           const std::vector<Eigen::Vector3d>& Q);

/// Least-squares camera-to-range-sensor offset given the frame rotation,
/// from the stacked pairwise-difference system.
Eigen::Vector3d solve_t0(const Eigen::Matrix3d& R_g_v,
                         const std::vector<PoseDiff>& diffs);

/// Pairwise LS objective: sum over diffs of
/// || x_r - R (R_v t_0 + t_v) ||^2.
double calibration_objective(const Eigen::Matrix3d& R_g_v,
                             const Eigen::Vector3d& t_0,
                             const std::vector<PoseDiff>& diffs);

/// Alternating closed-form estimation of the visual-to-global rotation,
/// the camera offset, and finally the frame translation as the average
/// reconstruction residual.
CalibrationResult calibrate(const std::vector<PoseSample>& samples,
                            double eps_tol = 1e-9, int max_iters = 500,
                            const PairPolicy& policy = {});

/// Position of the range sensor in the visual frame for a given camera
/// pose: R_v t_0 + t_v.
Eigen::Vector3d rig_position_visual(const Eigen::Matrix3d& R_v,
                                    const Eigen::Vector3d& t_v,
                                    const CalibrationResult& calib);

/// Global-frame bearing of a visual-frame point: normalize(R_g_v x_v).
Bearing bearing_to_global(const CalibrationResult& calib,
                          const Eigen::Vector3d& x_v);

/// Samples file: JSON array of {x_r:[3], R_v:[3][3] row-major, t_v:[3]}.
std::vector<PoseSample> load_pose_samples(const std::string& path);
void save_pose_samples(const std::string& path,
                       const std::vector<PoseSample>& samples);

}  // namespace hybridloc

#include "hybridloc/calib.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "hybridloc/random.hpp"

namespace hybridloc {

using Eigen::Matrix3d;
using Eigen::Vector3d;

void PoseSample::validate() const {
  require(x_r.allFinite() && t_v.allFinite() && R_v.allFinite(),
          "PoseSample: non-finite entries");
  const Matrix3d gram = R_v.transpose() * R_v;
  require((gram - Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-9,
          "PoseSample: R_v is not orthonormal");
  require(R_v.determinant() > 0.0, "PoseSample: R_v is not a proper rotation");
}

std::vector<PoseDiff> pairwise_differences(
    const std::vector<PoseSample>& samples, const PairPolicy& policy) {
  const int count = static_cast<int>(samples.size());
  require(count >= 2, "pairwise_differences: need at least 2 samples");
  for (const auto& s : samples) s.validate();

  auto diff = [&](int i, int j) {
    return PoseDiff{samples[i].x_r - samples[j].x_r,
                    samples[i].R_v - samples[j].R_v,
                    samples[i].t_v - samples[j].t_v};
  };

  std::vector<PoseDiff> out;
  const bool all_pairs =
      policy.mode == PairPolicy::Mode::all_pairs || count <= 25;
  if (all_pairs) {
    for (int i = 0; i < count; ++i)
      for (int j = i + 1; j < count; ++j) out.push_back(diff(i, j));
    return out;
  }

  for (int i = 0; i + 1 < count; ++i) out.push_back(diff(i, i + 1));
  RandomStream rng(stream_key(policy.seed, {0x70616972}));  // "pair"
  while (static_cast<int>(out.size()) < policy.cap) {
    const int i = static_cast<int>(rng.next_uniform(0.0, count));
    const int j = static_cast<int>(rng.next_uniform(0.0, count));
    if (i == j) continue;
    out.push_back(diff(i, j));
  }
  return out;
}

Matrix3d procrustes(const std::vector<Vector3d>& P,
                    const std::vector<Vector3d>& Q) {
  require(P.size() == Q.size(), "procrustes: point sets differ in size");
  require(P.size() >= 3, "procrustes: need at least 3 point pairs");

  Matrix3d cross = Matrix3d::Zero();
  for (size_t l = 0; l < P.size(); ++l)
    cross += P[l] * Q[l].transpose();

  Eigen::JacobiSVD<Matrix3d> svd(cross,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv[0] <= 0.0 || sv[1] <= 1e-12 * sv[0])
    throw DegenerateGeometryError(
        "procrustes: cross-covariance is rank deficient (collinear data)");

  const Matrix3d U = svd.matrixU();
  const Matrix3d V = svd.matrixV();
  const double sign = (U * V.transpose()).determinant() > 0.0 ? 1.0 : -1.0;
  return U * Eigen::DiagonalMatrix<double, 3>(1.0, 1.0, sign) * V.transpose();
}

Vector3d solve_t0(const Matrix3d& R_g_v, const std::vector<PoseDiff>& diffs) {
  require(!diffs.empty(), "solve_t0: no pairwise differences");
  // Stacked system R_g_v Rtilde t0 = xtilde - R_g_v ttilde; premultiply
  // by R_g_v' to work with the normal equations of Rtilde directly.
  Matrix3d normal = Matrix3d::Zero();
  Vector3d rhs = Vector3d::Zero();
  for (const auto& d : diffs) {
    normal += d.R_v.transpose() * d.R_v;
    rhs += d.R_v.transpose() * (R_g_v.transpose() * d.x_r - d.t_v);
  }
  Eigen::SelfAdjointEigenSolver<Matrix3d> eig(normal);
  const double lam_max = eig.eigenvalues().maxCoeff();
  if (lam_max <= 0.0 || eig.eigenvalues().minCoeff() <= 1e-10 * lam_max)
    throw DegenerateGeometryError(
        "solve_t0: insufficient rotational diversity in poses");
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose() * rhs;
}

double calibration_objective(const Matrix3d& R_g_v, const Vector3d& t_0,
                             const std::vector<PoseDiff>& diffs) {
  double obj = 0.0;
  for (const auto& d : diffs)
    obj += (d.x_r - R_g_v * (d.R_v * t_0 + d.t_v)).squaredNorm();
  return obj;
}

CalibrationResult calibrate(const std::vector<PoseSample>& samples,
                            double eps_tol, int max_iters,
                            const PairPolicy& policy) {
  require(eps_tol > 0.0 && max_iters >= 1, "calibrate: bad tolerances");
  const std::vector<PoseDiff> diffs = pairwise_differences(samples, policy);

  CalibrationResult result;
  Vector3d t_0 = Vector3d::Zero();
  Matrix3d R_prev = Matrix3d::Identity();
  double eps = std::numeric_limits<double>::infinity();

  std::vector<Vector3d> P(diffs.size()), Q(diffs.size());
  for (size_t l = 0; l < diffs.size(); ++l) P[l] = diffs[l].x_r;

  int k = 0;
  while (eps > eps_tol && k < max_iters) {
    ++k;
    for (size_t l = 0; l < diffs.size(); ++l)
      Q[l] = diffs[l].R_v * t_0 + diffs[l].t_v;
    const Matrix3d R = procrustes(P, Q);
    t_0 = solve_t0(R, diffs);
    result.objective_history.push_back(calibration_objective(R, t_0, diffs));
    eps = k == 1 ? std::numeric_limits<double>::infinity()
                 : (R - R_prev).norm();
    R_prev = R;
  }

  result.R_g_v = R_prev;
  result.t_0 = t_0;
  result.iterations = k;
  result.converged = eps <= eps_tol;

  Vector3d t_sum = Vector3d::Zero();
  for (const auto& s : samples)
    t_sum += s.x_r - result.R_g_v * (s.R_v * result.t_0 + s.t_v);
  result.t_g_v = t_sum / static_cast<double>(samples.size());

  double sq = 0.0;
  for (const auto& s : samples) {
    const Vector3d recon =
        result.R_g_v * (s.R_v * result.t_0 + s.t_v) + result.t_g_v;
    sq += (s.x_r - recon).squaredNorm();
  }
  result.residual_rms = std::sqrt(sq / static_cast<double>(samples.size()));
  return result;
}

Vector3d rig_position_visual(const Matrix3d& R_v, const Vector3d& t_v,
                             const CalibrationResult& calib) {
  return R_v * calib.t_0 + t_v;
}

Bearing bearing_to_global(const CalibrationResult& calib,
                          const Vector3d& x_v) {
  const Vector3d rotated = calib.R_g_v * x_v;
  const double norm = rotated.norm();
  if (norm < 1e-9)
    throw DegenerateGeometryError(
        "bearing_to_global: direction undefined for near-zero offset");
  Vec dir(3);
  dir << rotated[0] / norm, rotated[1] / norm, rotated[2] / norm;
  return Bearing(dir);
}

std::vector<PoseSample> load_pose_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sample file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);
  require(doc.is_array(), "sample file: top-level JSON array expected");

  std::vector<PoseSample> samples;
  for (const auto& item : doc) {
    PoseSample s;
    const auto& xr = item.at("x_r");
    const auto& rv = item.at("R_v");
    const auto& tv = item.at("t_v");
    require(xr.size() == 3 && rv.size() == 3 && tv.size() == 3,
            "sample file: 3D fields expected");
    for (int i = 0; i < 3; ++i) {
      s.x_r[i] = xr.at(i).get<double>();
      s.t_v[i] = tv.at(i).get<double>();
      require(rv.at(i).size() == 3, "sample file: R_v must be 3x3");
      for (int j = 0; j < 3; ++j) s.R_v(i, j) = rv.at(i).at(j).get<double>();
    }
    s.validate();
    samples.push_back(std::move(s));
  }
  return samples;
}

void save_pose_samples(const std::string& path,
                       const std::vector<PoseSample>& samples) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& s : samples) {
    nlohmann::json item;
    item["x_r"] = {s.x_r[0], s.x_r[1], s.x_r[2]};
    item["t_v"] = {s.t_v[0], s.t_v[1], s.t_v[2]};
    item["R_v"] = {{s.R_v(0, 0), s.R_v(0, 1), s.R_v(0, 2)},
                   {s.R_v(1, 0), s.R_v(1, 1), s.R_v(1, 2)},
                   {s.R_v(2, 0), s.R_v(2, 1), s.R_v(2, 2)}};
    doc.push_back(std::move(item));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sample file: " + path);
  out << doc.dump(2) << "\n";
}

}  // namespace hybridloc

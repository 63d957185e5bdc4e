#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "reenact/error.hpp"
#include "reenact/tracking.hpp"

namespace reenact {
namespace {

constexpr double kRankTolerance = 1e-9;
constexpr int kMaxHalvings = 30;

Eigen::Quaterniond rotation_from_vector(const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle == 0.0) return Eigen::Quaterniond::Identity();
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, w / angle));
}

double squared_norm_or_inf(const Pose& pose, const Points3& ref, const Points2& landmarks) {
  if (!(pose.scale > 0.0)) return INFINITY;
  return reprojection_residuals(pose, ref, landmarks).squaredNorm();
}

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda_id >= 0.0) || !(lambda_exp >= 0.0)) throw Error(ErrorCode::InvalidArgument, "ridge weights must be >= 0");
  if (gn_max_iters < 1 || outer_iters < 1) throw Error(ErrorCode::InvalidArgument, "iteration counts must be >= 1");
  if (!(gn_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "gn_tol must be >= 0");
  if (!(smoother.min_cutoff_hz > 0.0) || !(smoother.d_cutoff_hz > 0.0) || !(smoother.beta >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "smoother cutoffs must be > 0 and beta >= 0");
}

Pose apply_pose_delta(const Pose& pose, const PoseDelta& delta) {
  Pose out;
  out.rotation = (rotation_from_vector(delta.head<3>()) * pose.rotation).normalized();
  out.scale = pose.scale + delta[3];
  out.translation = pose.translation + delta.tail<2>();
  return out;
}

Eigen::VectorXd reprojection_residuals(const Pose& pose, const Points3& ref, const Points2& landmarks) {
  const Points2 projected = project(pose, ref);
  Eigen::VectorXd r(2 * ref.rows());
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    r[2 * i] = projected(i, 0) - landmarks(i, 0);
    r[2 * i + 1] = projected(i, 1) - landmarks(i, 1);
  }
  return r;
}

PoseJacobian pose_jacobian(const Pose& pose, const Points3& ref) {
  const Eigen::Matrix3d rot = pose.rotation.toRotationMatrix();
  const double s = pose.scale;
  PoseJacobian j(2 * ref.rows(), 6);
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    const Eigen::Vector3d y = rot * ref.row(i).transpose();
    // d(R' p)/dw = w x y = -[y]_x w; keep the first two rows.
    j.row(2 * i) << 0.0, s * y.z(), -s * y.y(), y.x(), 1.0, 0.0;
    j.row(2 * i + 1) << -s * y.z(), 0.0, s * y.x(), y.y(), 0.0, 1.0;
  }
  return j;
}

void check_landmarks(const Points2& landmarks) {
  if (!landmarks.allFinite()) throw Error(ErrorCode::DegenerateConfiguration, "non-finite landmarks");
  const Points2 centered = landmarks.rowwise() - landmarks.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const auto sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= kRankTolerance * sv[0])
    throw Error(ErrorCode::DegenerateConfiguration, "landmarks are collinear");
}

Pose initial_pose(const Points2& landmarks, const Points3& ref_points) {
  if (landmarks.rows() != ref_points.rows() || ref_points.rows() < 4)
    throw Error(ErrorCode::DegenerateConfiguration, "need at least 4 correspondences");
  check_landmarks(landmarks);

  const Eigen::RowVector3d ref_mean = ref_points.colwise().mean();
  const Eigen::RowVector2d lm_mean = landmarks.colwise().mean();
  const Eigen::MatrixXd ref_c = ref_points.rowwise() - ref_mean;
  const Eigen::MatrixXd lm_c = landmarks.rowwise() - lm_mean;

  Eigen::JacobiSVD<Eigen::MatrixXd> ref_svd(ref_c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto sv = ref_svd.singularValues();
  if (!(sv[0] > 0.0) || sv[2] <= kRankTolerance * sv[0])
    throw Error(ErrorCode::DegenerateConfiguration, "reference points are coplanar");

  // Least-squares affine rows: ref_c * M^T = lm_c.
  const Eigen::Matrix<double, 3, 2> mt = ref_svd.solve(lm_c);
  const Eigen::Matrix<double, 2, 3> m = mt.transpose();
  const double scale = 0.5 * (m.row(0).norm() + m.row(1).norm());
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorCode::DegenerateConfiguration, "zero scale");

  // Nearest matrix with orthonormal rows.
  Eigen::JacobiSVD<Eigen::MatrixXd> msvd(Eigen::MatrixXd(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Matrix<double, 2, 3> rows = msvd.matrixU() * msvd.matrixV().transpose();
  Eigen::Matrix3d rot;
  rot.row(0) = rows.row(0);
  rot.row(1) = rows.row(1);
  rot.row(2) = rows.row(0).cross(rows.row(1));

  Pose pose;
  pose.rotation = Eigen::Quaterniond(rot).normalized();
  if (pose.rotation.w() < 0.0) pose.rotation.coeffs() *= -1.0;
  pose.scale = scale;
  pose.translation = lm_mean.transpose() - scale * rows * ref_mean.transpose();
  return pose;
}

PoseFit refine_pose(const Pose& pose0, const Points2& landmarks, const Points3& ref_points, const SolverConfig& cfg) {
  PoseFit fit;
  fit.pose = pose0;
  double objective = squared_norm_or_inf(pose0, ref_points, landmarks);
  fit.objective_trace.push_back(objective);

  for (int iter = 0; iter < cfg.gn_max_iters && objective > 0.0; ++iter) {
    const Eigen::VectorXd r = reprojection_residuals(fit.pose, ref_points, landmarks);
    const PoseJacobian j = pose_jacobian(fit.pose, ref_points);
    Eigen::Matrix<double, 6, 6> h = j.transpose() * j;
    const PoseDelta g = j.transpose() * r;

    PoseDelta step;
    bool solved = false;
    for (double damping : {0.0, 1e-9}) {
      const Eigen::Matrix<double, 6, 6> damped = h + damping * Eigen::Matrix<double, 6, 6>::Identity();
      Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(damped);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) continue;
      step = ldlt.solve(-g);
      if (step.allFinite() && (damped * step + g).norm() <= 1e-6 * g.norm()) {
        solved = true;
        break;
      }
    }
    if (!solved) throw Error(ErrorCode::NumericalFailure, "singular pose normal equations");

    double factor = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, factor *= 0.5) {
      const Pose candidate = apply_pose_delta(fit.pose, factor * step);
      const double trial = squared_norm_or_inf(candidate, ref_points, landmarks);
      if (trial < objective) {
        const PoseDelta applied = factor * step;
        fit.pose = candidate;
        objective = trial;
        fit.objective_trace.push_back(objective);
        ++fit.iterations;
        accepted = true;
        const double rel = std::sqrt(applied.head<3>().squaredNorm() +
                                     (applied.tail<3>() / fit.pose.scale).squaredNorm());
        if (rel <= cfg.gn_tol) iter = cfg.gn_max_iters;
        break;
      }
    }
    if (!accepted) break;
  }
  fit.rmse = std::sqrt(objective / static_cast<double>(ref_points.rows()));
  return fit;
}

}  // namespace reenact

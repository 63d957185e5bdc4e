#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "reenact/error.hpp"
#include "reenact/tracking.hpp"

namespace reenact {
namespace {

Eigen::Matrix<double, 2, 3> camera_rows(const Pose& pose) {
  return pose.scale * pose.rotation.toRotationMatrix().topRows<2>();
}

/// Rows 2i, 2i+1 = camera · basis block of landmark vertex i.
template <typename BlockFn>
Eigen::MatrixXd landmark_design(const FaceModel& model, const Pose& pose, int cols, BlockFn block) {
  const Eigen::Matrix<double, 2, 3> cam = camera_rows(pose);
  Eigen::MatrixXd a(2 * kLandmarkCount, cols);
  for (int i = 0; i < kLandmarkCount; ++i)
    a.middleRows<2>(2 * i) = cam * block(model.landmark_map[i]).template cast<double>();
  return a;
}

Eigen::MatrixXd expression_design(const FaceModel& model, const Pose& pose) {
  return landmark_design(model, pose, model.exp_count, [&](std::size_t v) { return model.exp_block(v); });
}

Eigen::MatrixXd identity_design(const FaceModel& model, const Pose& pose) {
  return landmark_design(model, pose, model.id_count, [&](std::size_t v) { return model.id_block(v); });
}

/// landmarks - projection of the given 3D landmark positions, stacked.
Eigen::VectorXd residual_to(const Pose& pose, const Points3& base, const Points2& landmarks) {
  return -reprojection_residuals(pose, base, landmarks);
}

Eigen::VectorXd solve_ridge(const Eigen::MatrixXd& normal, const Eigen::VectorXd& rhs, double lambda) {
  const Eigen::MatrixXd system = normal + lambda * Eigen::MatrixXd::Identity(normal.rows(), normal.cols());
  if (lambda > 0.0) {
    Eigen::LLT<Eigen::MatrixXd> llt(system);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
  }
  return system.completeOrthogonalDecomposition().solve(rhs);
}

Points3 mean_landmarks(const FaceModel& model) {
  Points3 out(kLandmarkCount, 3);
  for (int i = 0; i < kLandmarkCount; ++i) out.row(i) = model.mean_vertex(model.landmark_map[i]).transpose();
  return out;
}

}  // namespace

void expression_system(const FaceModel& model, const IdentityParams& identity, const Pose& pose,
                       const Points2& landmarks, Eigen::MatrixXd& design, Eigen::VectorXd& rhs) {
  design = expression_design(model, pose);
  rhs = residual_to(pose, landmark_positions(model, identity, ExpressionParams::zero(model)), landmarks);
}

ExpressionParams fit_expression(const FaceModel& model, const IdentityParams& identity, const Pose& pose,
                                const Points2& landmarks, const SolverConfig& cfg) {
  Eigen::MatrixXd a;
  Eigen::VectorXd r;
  expression_system(model, identity, pose, landmarks, a, r);
  return {solve_ridge(a.transpose() * a, a.transpose() * r, cfg.lambda_exp)};
}

double identity_objective(const FaceModel& model, const std::vector<LandmarkFrame>& frames, const IdentityFit& fit,
                          const SolverConfig& cfg) {
  double total = cfg.lambda_id * fit.identity.alpha.squaredNorm();
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (!fit.used[f]) continue;
    const Points3 ref = landmark_positions(model, fit.identity, fit.expressions[f]);
    total += reprojection_residuals(fit.poses[f], ref, frames[f].points).squaredNorm();
    total += cfg.lambda_exp * fit.expressions[f].beta.squaredNorm();
  }
  return total;
}

namespace {

/// One Gauss-Newton step over every pose, expression and the identity, with the
/// per-frame blocks eliminated. Returns false when no improving step is found.
bool joint_identity_step(const FaceModel& model, const std::vector<LandmarkFrame>& frames, const SolverConfig& cfg,
                         IdentityFit& fit) {
  const int kid = model.id_count, kexp = model.exp_count, m = 6 + kexp;
  const std::size_t n = frames.size();
  std::vector<Eigen::LDLT<Eigen::MatrixXd>> block(n);
  std::vector<Eigen::MatrixXd> couple(n);
  std::vector<Eigen::VectorXd> grad(n);
  Eigen::MatrixXd schur = cfg.lambda_id * Eigen::MatrixXd::Identity(kid, kid);
  Eigen::VectorXd rhs = -cfg.lambda_id * fit.identity.alpha;
  for (std::size_t f = 0; f < n; ++f) {
    if (!fit.used[f]) continue;
    const Points3 ref = landmark_positions(model, fit.identity, fit.expressions[f]);
    const Eigen::VectorXd r = reprojection_residuals(fit.poses[f], ref, frames[f].points);
    Eigen::MatrixXd j(r.size(), m);
    j.leftCols<6>() = pose_jacobian(fit.poses[f], ref);
    j.rightCols(kexp) = expression_design(model, fit.poses[f]);
    const Eigen::MatrixXd a = identity_design(model, fit.poses[f]);
    Eigen::MatrixXd h = j.transpose() * j;
    h.diagonal().tail(kexp).array() += cfg.lambda_exp;
    h.diagonal().head<6>().array() += 1e-12 * (1.0 + h.diagonal().head<6>().array());
    block[f].compute(h);
    if (block[f].info() != Eigen::Success) return false;
    couple[f] = j.transpose() * a;
    grad[f] = j.transpose() * r;
    grad[f].tail(kexp) += cfg.lambda_exp * fit.expressions[f].beta;
    schur += a.transpose() * a - couple[f].transpose() * block[f].solve(couple[f]);
    rhs += -a.transpose() * r + couple[f].transpose() * block[f].solve(grad[f]);
  }
  const Eigen::VectorXd d_alpha = schur.ldlt().solve(rhs);
  if (!d_alpha.allFinite()) return false;
  std::vector<Eigen::VectorXd> d_frame(n);
  for (std::size_t f = 0; f < n; ++f)
    if (fit.used[f]) d_frame[f] = block[f].solve(-grad[f] - couple[f] * d_alpha);

  const double before = identity_objective(model, frames, fit, cfg);
  double factor = 1.0;
  for (int halving = 0; halving <= 20; ++halving, factor *= 0.5) {
    IdentityFit trial = fit;
    trial.identity.alpha += factor * d_alpha;
    for (std::size_t f = 0; f < n; ++f) {
      if (!fit.used[f]) continue;
      trial.poses[f] = apply_pose_delta(fit.poses[f], factor * d_frame[f].head<6>());
      trial.expressions[f].beta += factor * d_frame[f].tail(kexp);
    }
    const double after = identity_objective(model, frames, trial, cfg);
    if (after < before) {
      trial.objective.push_back(after);
      fit = std::move(trial);
      return (before - after) > 1e-15 * before;
    }
  }
  return false;
}

}  // namespace

IdentityFit fit_identity(const FaceModel& model, const std::vector<LandmarkFrame>& frames, const SolverConfig& cfg) {
  if (frames.empty()) throw Error(ErrorCode::EmptyClip, "no frames to fit an identity");
  cfg.validate();

  const std::size_t n = frames.size();
  IdentityFit fit;
  fit.identity = IdentityParams::zero(model);
  fit.poses.assign(n, Pose{});
  fit.expressions.assign(n, ExpressionParams::zero(model));
  fit.used.assign(n, false);

  const Points3 mean_ref = mean_landmarks(model);
  std::size_t usable = 0;
  for (std::size_t f = 0; f < n; ++f) {
    try {
      fit.poses[f] = initial_pose(frames[f].points, mean_ref);
      fit.used[f] = true;
      ++usable;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateConfiguration) throw;
    }
  }
  if (usable == 0) throw Error(ErrorCode::DegenerateConfiguration, "every frame of the clip is degenerate");

  const Points3 mean_only = mean_landmarks(model);
  for (int round = 0; round < cfg.outer_iters; ++round) {
    // (a) per-frame pose, warm-started from the previous round.
    for (std::size_t f = 0; f < n; ++f) {
      if (!fit.used[f]) continue;
      const Points3 ref = landmark_positions(model, fit.identity, fit.expressions[f]);
      fit.poses[f] = refine_pose(fit.poses[f], frames[f].points, ref, cfg).pose;
    }
    // (b) per-frame expression given identity and pose.
    for (std::size_t f = 0; f < n; ++f) {
      if (!fit.used[f]) continue;
      fit.expressions[f] = fit_expression(model, fit.identity, fit.poses[f], frames[f].points, cfg);
    }
    // (c) identity, with every frame's expression eliminated through its Schur
    // complement so that (identity, expressions) are jointly optimal for these poses.
    const int kid = model.id_count;
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(kid, kid);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(kid);
    std::vector<Eigen::LLT<Eigen::MatrixXd>> exp_factor(n);
    std::vector<Eigen::MatrixXd> cross(n);
    std::vector<Eigen::VectorXd> exp_rhs(n);
    for (std::size_t f = 0; f < n; ++f) {
      if (!fit.used[f]) continue;
      const Eigen::MatrixXd a = identity_design(model, fit.poses[f]);
      const Eigen::MatrixXd b = expression_design(model, fit.poses[f]);
      const Eigen::VectorXd r = residual_to(fit.poses[f], mean_only, frames[f].points);
      Eigen::MatrixXd c = b.transpose() * b;
      c.diagonal().array() += std::max(cfg.lambda_exp, 1e-12);
      exp_factor[f].compute(c);
      cross[f] = b.transpose() * a;
      exp_rhs[f] = b.transpose() * r;
      normal += a.transpose() * a - cross[f].transpose() * exp_factor[f].solve(cross[f]);
      rhs += a.transpose() * r - cross[f].transpose() * exp_factor[f].solve(exp_rhs[f]);
    }
    IdentityFit candidate = fit;
    candidate.identity.alpha = solve_ridge(normal, rhs, cfg.lambda_id);
    for (std::size_t f = 0; f < n; ++f) {
      if (!fit.used[f]) continue;
      candidate.expressions[f].beta = exp_factor[f].solve(exp_rhs[f] - cross[f] * candidate.identity.alpha);
    }
    const double before = identity_objective(model, frames, fit, cfg);
    const double after = identity_objective(model, frames, candidate, cfg);
    if (after <= before) fit = std::move(candidate);
    fit.objective.push_back(std::min(before, after));
  }
  for (int iter = 0; iter < cfg.gn_max_iters; ++iter)
    if (!joint_identity_step(model, frames, cfg, fit)) break;
  return fit;
}

FrameFit refine_frame(const FaceModel& model, const IdentityParams& identity, const Points2& landmarks,
                      const FrameFit& start, const SolverConfig& cfg) {
  const int k = model.exp_count;
  auto objective = [&](const Pose& pose, const Eigen::VectorXd& beta) {
    const double e = reprojection_residuals(pose, landmark_positions(model, identity, {beta}), landmarks).squaredNorm();
    return std::isfinite(e) ? e + cfg.lambda_exp * beta.squaredNorm() : INFINITY;
  };

  FrameFit fit = start;
  double current = objective(fit.pose, fit.expression.beta);
  for (int iter = 0; iter < cfg.gn_max_iters; ++iter) {
    const Points3 ref = landmark_positions(model, identity, fit.expression);
    const Eigen::VectorXd r = reprojection_residuals(fit.pose, ref, landmarks);
    Eigen::MatrixXd j(r.size(), 6 + k);
    j.leftCols<6>() = pose_jacobian(fit.pose, ref);
    j.rightCols(k) = expression_design(model, fit.pose);
    Eigen::MatrixXd h = j.transpose() * j;
    h.diagonal().tail(k).array() += cfg.lambda_exp;
    Eigen::VectorXd g = j.transpose() * r;
    g.tail(k) += cfg.lambda_exp * fit.expression.beta;
    const Eigen::VectorXd step = -h.completeOrthogonalDecomposition().solve(g);
    if (!step.allFinite()) break;

    bool accepted = false;
    double factor = 1.0;
    for (int halving = 0; halving <= 20; ++halving, factor *= 0.5) {
      const Pose pose = apply_pose_delta(fit.pose, factor * step.head<6>());
      const Eigen::VectorXd beta = fit.expression.beta + factor * step.tail(k);
      const double trial = objective(pose, beta);
      if (trial < current) {
        fit.pose = pose;
        fit.expression.beta = beta;
        current = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double rel = factor * std::sqrt(step.head<3>().squaredNorm() +
                                          (step.segment<3>(3) / fit.pose.scale).squaredNorm() +
                                          step.tail(k).squaredNorm() / (1.0 + fit.expression.beta.squaredNorm()));
    if (rel <= cfg.gn_tol * 1e-3) break;
  }
  const Points3 ref = landmark_positions(model, identity, fit.expression);
  fit.rmse = std::sqrt(reprojection_residuals(fit.pose, ref, landmarks).squaredNorm() / kLandmarkCount);
  return fit;
}

}  // namespace reenact

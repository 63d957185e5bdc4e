#include <cmath>

#include "reenact/error.hpp"
#include "reenact/tracking.hpp"

namespace reenact {

TrackerState::TrackerState(std::shared_ptr<const FaceModel> m, TrackerOptions opts)
    : model(std::move(m)), options(opts), smoother(opts.solver.smoother) {
  if (!model) throw Error(ErrorCode::InvalidArgument, "tracker needs a model");
  options.solver.validate();
  identity = IdentityParams::zero(*model);
  raw_expression = ExpressionParams::zero(*model);
}

void TrackerState::calibrate(const IdentityParams& id) {
  if (id.alpha.size() != model->id_count) throw Error(ErrorCode::LengthMismatch, "identity length mismatch");
  identity = id;
  identity_frozen = true;
  bootstrap.clear();
}

FrameFit fit_frame(const FaceModel& model, const IdentityParams& identity, const Points2& landmarks,
                   const std::optional<Pose>& warm, const ExpressionParams& warm_expression,
                   const TrackerOptions& options) {
  check_landmarks(landmarks);
  const SolverConfig& cfg = options.solver;

  auto run = [&](Pose pose, ExpressionParams beta) {
    const double rmse = 0.0;
    for (int round = 0; round < cfg.outer_iters; ++round) {
      const Points3 ref = landmark_positions(model, identity, beta);
      pose = refine_pose(pose, landmarks, ref, cfg).pose;
      beta = fit_expression(model, identity, pose, landmarks, cfg);
    }
    return refine_frame(model, identity, landmarks, FrameFit{pose, beta, rmse}, cfg);
  };

  auto cold = [&] {
    const Points3 ref = landmark_positions(model, identity, ExpressionParams::zero(model));
    return run(initial_pose(landmarks, ref), ExpressionParams::zero(model));
  };

  if (!warm) return cold();
  FrameFit fit = run(*warm, warm_expression);
  if (fit.rmse > options.reinit_rmse_px) {
    FrameFit retry = cold();
    if (retry.rmse < fit.rmse) fit = std::move(retry);
  }
  return fit;
}

TrackedFrame track_frame(TrackerState& state, const LandmarkFrame& frame) {
  const FaceModel& model = *state.model;
  FrameFit fit;
  try {
    if (!state.identity_frozen) {
      check_landmarks(frame.points);
      state.bootstrap.push_back(frame);
      if (static_cast<int>(state.bootstrap.size()) >= state.options.bootstrap_frames)
        state.calibrate(fit_identity(model, state.bootstrap, state.options.solver).identity);
    }
    fit = fit_frame(model, state.identity, frame.points, state.raw_pose, state.raw_expression, state.options);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateConfiguration || !state.last) throw;
    TrackedFrame repeated = *state.last;
    repeated.t = frame.t;
    repeated.stale = true;
    return repeated;
  }

  state.raw_pose = fit.pose;
  state.raw_expression = fit.expression;
  state.raw_gaze = estimate_gaze(frame, state.raw_gaze);

  TrackedFrame raw;
  raw.t = frame.t;
  raw.model_name = model.name;
  raw.identity = state.identity;
  raw.expression = fit.expression;
  raw.pose = fit.pose;
  raw.gaze = state.raw_gaze;
  raw.residual_rmse = fit.rmse;

  TrackedFrame smoothed = state.smoother.smooth(raw, &state.last_smoother_warning);
  state.last = smoothed;
  return smoothed;
}

}  // namespace reenact

#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reenact/morphable_model.hpp"

namespace reenact {

/// One frame of 2D observations in iBUG order, plus optional iris centers
/// (image-left eye first).
struct LandmarkFrame {
  double t = 0.0;
  Points2 points = Points2::Zero(kLandmarkCount, 2);
  std::optional<std::array<Eigen::Vector2d, 2>> iris;
  int width = 0;
  int height = 0;
};

struct EyeGaze {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();  // in [-1,1]^2, relative to the eyelid box
  bool valid = false;

  bool operator==(const EyeGaze&) const = default;
};

struct GazeState {
  EyeGaze left;   // iBUG 36-41
  EyeGaze right;  // iBUG 42-47

  bool operator==(const GazeState&) const = default;
};

struct TrackedFrame {
  double t = 0.0;
  std::string model_name;
  IdentityParams identity;
  ExpressionParams expression;
  Pose pose;
  GazeState gaze;
  double residual_rmse = 0.0;  // pixels, from the unsmoothed fit
  bool stale = false;          // parameters repeated from the previous frame
};

struct SmootherConfig {
  double min_cutoff_hz = 1.0;
  double beta = 0.05;
  double d_cutoff_hz = 1.0;
};

struct SolverConfig {
  double lambda_id = 1e-3;
  double lambda_exp = 5e-4;
  int gn_max_iters = 10;
  double gn_tol = 1e-6;
  int outer_iters = 3;
  SmootherConfig smoother;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Pose

/// Pose increment ordering used by the Jacobian: (rotation vector applied on
/// the left in camera space, scale, tx, ty).
using PoseDelta = Eigen::Matrix<double, 6, 1>;
using PoseJacobian = Eigen::Matrix<double, Eigen::Dynamic, 6>;

Pose apply_pose_delta(const Pose& pose, const PoseDelta& delta);

/// Stacked reprojection residuals (x_i, y_i interleaved): project(pose, ref) - landmarks.
Eigen::VectorXd reprojection_residuals(const Pose& pose, const Points3& ref, const Points2& landmarks);

/// Analytic d(residuals)/d(delta) at delta = 0.
PoseJacobian pose_jacobian(const Pose& pose, const Points3& ref);

/// Closed-form scaled-orthographic alignment.
Pose initial_pose(const Points2& landmarks, const Points3& ref_points);

struct PoseFit {
  Pose pose;
  double rmse = 0.0;                   // pixels per landmark
  int iterations = 0;                  // accepted Gauss-Newton steps
  std::vector<double> objective_trace;  // objective before the first and after every accepted step
};

/// Gauss-Newton with halving line search; only strictly improving steps are taken.
PoseFit refine_pose(const Pose& pose0, const Points2& landmarks, const Points3& ref_points, const SolverConfig& cfg);

/// Throws DegenerateConfiguration for non-finite or collinear landmarks.
void check_landmarks(const Points2& landmarks);

// ---------------------------------------------------------------------------
// Shape

/// Ridge solution of the expression coefficients for a fixed pose and identity.
ExpressionParams fit_expression(const FaceModel& model, const IdentityParams& identity, const Pose& pose,
                                const Points2& landmarks, const SolverConfig& cfg);

/// Linear expression system (A, r) solved by fit_expression, exposed for checks.
void expression_system(const FaceModel& model, const IdentityParams& identity, const Pose& pose,
                       const Points2& landmarks, Eigen::MatrixXd& design, Eigen::VectorXd& rhs);

struct IdentityFit {
  IdentityParams identity;
  std::vector<Pose> poses;                   // one per input frame
  std::vector<ExpressionParams> expressions;  // one per input frame
  std::vector<bool> used;                     // false for dropped (degenerate) frames
  std::vector<double> objective;              // total objective after every outer round
};

/// Block-coordinate fit of one identity over a clip.
IdentityFit fit_identity(const FaceModel& model, const std::vector<LandmarkFrame>& frames, const SolverConfig& cfg);

/// Reprojection + ridge objective minimized by fit_identity.
double identity_objective(const FaceModel& model, const std::vector<LandmarkFrame>& frames, const IdentityFit& fit,
                          const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Gaze

/// Iris offset inside each eyelid box. Eyes without a usable observation keep
/// the offset from `previous` and are flagged invalid.
GazeState estimate_gaze(const LandmarkFrame& frame, const GazeState& previous = {});

// ---------------------------------------------------------------------------
// Smoothing

/// One-Euro low-pass over a fixed number of scalar channels sharing timestamps.
class OneEuroSmoother {
 public:
  explicit OneEuroSmoother(SmootherConfig cfg = {}) : cfg_(cfg) {}

  struct Result {
    Eigen::VectorXd values;
    bool warning = false;  // timestamp not increasing: previous output returned, state untouched
  };

  Result smooth(const Eigen::VectorXd& x, double t);
  void reset();
  const SmootherConfig& config() const { return cfg_; }

 private:
  SmootherConfig cfg_;
  std::optional<double> last_t_;
  Eigen::VectorXd value_;
  Eigen::VectorXd derivative_;
};

/// Smooths every time-varying channel of a tracked frame: quaternion
/// (sign-aligned, renormalized), scale, translation, expression, gaze.
class FrameSmoother {
 public:
  explicit FrameSmoother(SmootherConfig cfg = {}) : filter_(cfg) {}

  /// Returns the smoothed frame; `warning` set when t did not increase.
  TrackedFrame smooth(const TrackedFrame& raw, bool* warning = nullptr);

 private:
  OneEuroSmoother filter_;
  std::optional<Eigen::Quaterniond> last_rotation_;
};

// ---------------------------------------------------------------------------
// Tracker

struct TrackerOptions {
  SolverConfig solver;
  int bootstrap_frames = 30;        // frames buffered before the identity is frozen
  double reinit_rmse_px = 4.0;      // warm start falling above this retries from initial_pose
};

struct TrackerState {
  TrackerState(std::shared_ptr<const FaceModel> model, TrackerOptions options = {});

  /// Freezes the identity; tracking no longer bootstraps.
  void calibrate(const IdentityParams& identity);
  bool calibrated() const { return identity_frozen; }

  std::shared_ptr<const FaceModel> model;
  TrackerOptions options;
  IdentityParams identity;
  bool identity_frozen = false;
  std::vector<LandmarkFrame> bootstrap;
  FrameSmoother smoother;
  std::optional<TrackedFrame> last;    // last smoothed output
  std::optional<Pose> raw_pose;        // warm start
  ExpressionParams raw_expression;     // warm start
  GazeState raw_gaze;
  bool last_smoother_warning = false;
};

/// Fits one frame, updates the state, returns the smoothed parameters.
/// Degenerate frames repeat the previous output with stale = true; a degenerate
/// first frame throws DegenerateConfiguration.
TrackedFrame track_frame(TrackerState& state, const LandmarkFrame& frame);

/// Unsmoothed fit of pose and expression for a known identity, as used inside
/// track_frame. `warm` seeds the pose; without it initial_pose is used.
struct FrameFit {
  Pose pose;
  ExpressionParams expression;
  double rmse = 0.0;
};
FrameFit fit_frame(const FaceModel& model, const IdentityParams& identity, const Points2& landmarks,
                   const std::optional<Pose>& warm, const ExpressionParams& warm_expression,
                   const TrackerOptions& options);

/// Joint Gauss-Newton over pose and expression (ridge on expression), started
/// from `start`. Steps are accepted only when the objective strictly drops.
FrameFit refine_frame(const FaceModel& model, const IdentityParams& identity, const Points2& landmarks,
                      const FrameFit& start, const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Landmark files (JSON Lines)

std::vector<LandmarkFrame> read_landmark_file(const std::filesystem::path& path);
void write_landmark_file(const std::filesystem::path& path, const std::vector<LandmarkFrame>& frames);
LandmarkFrame landmark_frame_from_json(const std::string& line);
std::string landmark_frame_to_json(const LandmarkFrame& frame);

// ---------------------------------------------------------------------------
// Synthetic streams (closed-loop fixtures and benchmarks)

struct SyntheticClipOptions {
  std::uint64_t seed = 1;
  int frames = 100;
  double fps = 30.0;
  int width = 256;
  int height = 256;
  double noise_px = 0.0;
  double face_scale = 0.45;  // pixels per model unit, as a fraction of the shorter image side
  double identity_sigma = 1.0;
  double expression_amplitude = 1.0;
  double yaw_deg = 20.0;
  double pitch_deg = 10.0;
  double roll_deg = 5.0;
  double gaze_amplitude = 0.6;
  bool with_iris = true;
  std::optional<IdentityParams> identity;  // overrides the random identity
};

struct SyntheticClip {
  IdentityParams identity;
  std::vector<ExpressionParams> expressions;
  std::vector<Pose> poses;
  std::vector<GazeState> gaze;
  std::vector<LandmarkFrame> frames;
};

SyntheticClip make_synthetic_clip(const FaceModel& model, const SyntheticClipOptions& options);

}  // namespace reenact

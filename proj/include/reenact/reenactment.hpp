#pragma once

#include <filesystem>
#include <string>

#include "reenact/tracking.hpp"

namespace reenact {

struct PoseStats {
  double mean_scale = 1.0;
  Eigen::Vector2d mean_translation = Eigen::Vector2d::Zero();
  double scale_std = 0.0;
  Eigen::Vector2d translation_std = Eigen::Vector2d::Zero();

  bool operator==(const PoseStats&) const = default;
};

struct ExpressionRange {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
};

struct TargetProfile {
  std::string model_name;
  std::string label;
  IdentityParams identity;
  PoseStats pose_stats;
  ExpressionRange expression_range;

  void validate() const;
};

struct SwapPolicy {
  bool retarget_pose = true;
  double expression_gain = 1.0;
  bool transfer_gaze = true;
  bool clamp_expression = true;

  void validate() const;
  bool operator==(const SwapPolicy&) const = default;
};

/// Running mean and standard deviation of scale and translation (Welford).
class PoseStatsAccumulator {
 public:
  void add(const Pose& pose);
  int count() const { return n_; }
  /// Sample statistics; standard deviations are 0 for fewer than two poses.
  PoseStats stats() const;

 private:
  int n_ = 0;
  double mean_scale_ = 0.0, m2_scale_ = 0.0;
  Eigen::Vector2d mean_t_ = Eigen::Vector2d::Zero(), m2_t_ = Eigen::Vector2d::Zero();
};

/// Profile of a calibrated target clip. Throws EmptyClip for no frames and
/// ModelMismatch when frames disagree on model or identity.
TargetProfile build_target_profile(const std::vector<TrackedFrame>& tracked, const std::string& label);

/// Source expression, pose and gaze on the target identity. Clamping uses the
/// target's expression range extended to include the neutral face. Pose retargeting
/// uses `source_stats`; without them the source is taken to share the target's
/// framing and the pose passes through.
TrackedFrame swap_identity(const TrackedFrame& src, const TargetProfile& profile, const SwapPolicy& policy,
                           const PoseStats* source_stats = nullptr);

/// Keeps rotation, maps scale and translation from the source framing
/// statistics onto the target's.
Pose retarget_pose(const Pose& src_pose, const PoseStats& src_stats, const PoseStats& tgt_stats);

void save_profile(const TargetProfile& profile, const std::filesystem::path& path);
TargetProfile load_profile(const std::filesystem::path& path);
std::string profile_to_json(const TargetProfile& profile);
TargetProfile profile_from_json(const std::string& text);

}  // namespace reenact

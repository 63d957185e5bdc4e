#include "reenact/reenactment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reenact/error.hpp"

namespace reenact {

using nlohmann::json;

void TargetProfile::validate() const {
  const auto k = expression_range.min.size();
  if (expression_range.max.size() != k) throw Error(ErrorCode::LengthMismatch, "expression range bounds differ in length");
  if ((expression_range.min.array() > expression_range.max.array()).any())
    throw Error(ErrorCode::InvalidStats, "expression range min exceeds max");
  if (!(pose_stats.scale_std >= 0.0) || !(pose_stats.translation_std.array() >= 0.0).all())
    throw Error(ErrorCode::InvalidStats, "negative standard deviation");
  if (!std::isfinite(pose_stats.mean_scale) || !pose_stats.mean_translation.allFinite())
    throw Error(ErrorCode::InvalidStats, "non-finite pose statistics");
  if (!identity.alpha.allFinite()) throw Error(ErrorCode::BadFormat, "non-finite identity");
}

void SwapPolicy::validate() const {
  if (!std::isfinite(expression_gain) || expression_gain < 0.0)
    throw Error(ErrorCode::InvalidArgument, "expression_gain must be finite and >= 0");
}

void PoseStatsAccumulator::add(const Pose& pose) {
  ++n_;
  const double ds = pose.scale - mean_scale_;
  mean_scale_ += ds / n_;
  m2_scale_ += ds * (pose.scale - mean_scale_);
  const Eigen::Vector2d dt = pose.translation - mean_t_;
  mean_t_ += dt / n_;
  m2_t_ += dt.cwiseProduct(pose.translation - mean_t_);
}

PoseStats PoseStatsAccumulator::stats() const {
  PoseStats s;
  s.mean_scale = mean_scale_;
  s.mean_translation = mean_t_;
  if (n_ > 1) {
    s.scale_std = std::sqrt(m2_scale_ / (n_ - 1));
    s.translation_std = (m2_t_ / (n_ - 1)).cwiseSqrt();
  }
  return s;
}

TargetProfile build_target_profile(const std::vector<TrackedFrame>& tracked, const std::string& label) {
  if (tracked.empty()) throw Error(ErrorCode::EmptyClip, "no tracked frames");
  const TrackedFrame& first = tracked.front();
  TargetProfile p;
  p.model_name = first.model_name;
  p.label = label;
  p.identity = first.identity;
  p.expression_range.min = first.expression.beta;
  p.expression_range.max = first.expression.beta;
  PoseStatsAccumulator acc;
  for (const TrackedFrame& f : tracked) {
    if (f.model_name != p.model_name) throw Error(ErrorCode::ModelMismatch, "frames come from different models");
    if (f.identity.alpha.size() != p.identity.alpha.size() || f.identity.alpha != p.identity.alpha)
      throw Error(ErrorCode::ModelMismatch, "frames do not share one identity");
    if (f.expression.beta.size() != p.expression_range.min.size())
      throw Error(ErrorCode::LengthMismatch, "expression length differs between frames");
    p.expression_range.min = p.expression_range.min.cwiseMin(f.expression.beta);
    p.expression_range.max = p.expression_range.max.cwiseMax(f.expression.beta);
    acc.add(f.pose);
  }
  p.pose_stats = acc.stats();
  return p;
}

Pose retarget_pose(const Pose& src_pose, const PoseStats& src, const PoseStats& tgt) {
  if (src.mean_scale == 0.0 || !std::isfinite(src.mean_scale))
    throw Error(ErrorCode::InvalidStats, "source mean scale must be finite and nonzero");
  // Arranged so equal statistics give k == 1 and both corrections vanish exactly.
  const double k = tgt.mean_scale / src.mean_scale;
  Pose out = src_pose;
  out.scale = src_pose.scale * k;
  const Eigen::Vector2d rel = src_pose.translation - src.mean_translation;
  out.translation = src_pose.translation + (tgt.mean_translation - src.mean_translation) + rel * (k - 1.0);
  return out;
}

TrackedFrame swap_identity(const TrackedFrame& src, const TargetProfile& profile, const SwapPolicy& policy,
                           const PoseStats* source_stats) {
  policy.validate();
  if (src.model_name != profile.model_name)
    throw Error(ErrorCode::ModelMismatch, "source model '" + src.model_name + "' but profile model '" +
                                              profile.model_name + "'");
  const auto k = src.expression.beta.size();
  if (policy.clamp_expression && profile.expression_range.min.size() != k)
    throw Error(ErrorCode::ModelMismatch, "expression length differs from the profile range");

  TrackedFrame out = src;
  out.identity = profile.identity;
  out.expression.beta = policy.expression_gain * src.expression.beta;
  if (policy.clamp_expression) {
    const Eigen::VectorXd lo = profile.expression_range.min.cwiseMin(0.0);
    const Eigen::VectorXd hi = profile.expression_range.max.cwiseMax(0.0);
    out.expression.beta = out.expression.beta.cwiseMax(lo).cwiseMin(hi);
  }
  if (!policy.transfer_gaze) {
    out.gaze.left.offset.setZero();
    out.gaze.right.offset.setZero();
  }
  if (policy.retarget_pose && source_stats) out.pose = retarget_pose(src.pose, *source_stats, profile.pose_stats);
  return out;
}

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::Vector2d json_vec2(const json& j) {
  const auto values = j.get<std::vector<double>>();
  if (values.size() != 2) throw Error(ErrorCode::BadFormat, "expected a 2-vector");
  return {values[0], values[1]};
}

}  // namespace

std::string profile_to_json(const TargetProfile& p) {
  json j;
  j["model_name"] = p.model_name;
  j["label"] = p.label;
  j["identity"] = vec_json(p.identity.alpha);
  j["pose_stats"] = {
      {"mean_scale", p.pose_stats.mean_scale},
      {"mean_translation", {p.pose_stats.mean_translation.x(), p.pose_stats.mean_translation.y()}},
      {"scale_std", p.pose_stats.scale_std},
      {"translation_std", {p.pose_stats.translation_std.x(), p.pose_stats.translation_std.y()}},
  };
  j["expression_range"] = {{"min", vec_json(p.expression_range.min)}, {"max", vec_json(p.expression_range.max)}};
  return j.dump(2);
}

TargetProfile profile_from_json(const std::string& text) {
  TargetProfile p;
  try {
    const json j = json::parse(text);
    p.model_name = j.at("model_name").get<std::string>();
    p.label = j.at("label").get<std::string>();
    p.identity.alpha = json_vec(j.at("identity"));
    const json& s = j.at("pose_stats");
    p.pose_stats.mean_scale = s.at("mean_scale").get<double>();
    p.pose_stats.mean_translation = json_vec2(s.at("mean_translation"));
    p.pose_stats.scale_std = s.at("scale_std").get<double>();
    p.pose_stats.translation_std = json_vec2(s.at("translation_std"));
    p.expression_range.min = json_vec(j.at("expression_range").at("min"));
    p.expression_range.max = json_vec(j.at("expression_range").at("max"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("profile: ") + e.what());
  }
  p.validate();
  return p;
}

void save_profile(const TargetProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << profile_to_json(profile) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

TargetProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return profile_from_json(ss.str());
}

}  // namespace reenact

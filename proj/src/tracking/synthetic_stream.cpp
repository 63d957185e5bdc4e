#include <cmath>
#include <numbers>
#include <random>

#include "reenact/tracking.hpp"

namespace reenact {
namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

/// Smooth bounded signal: two sinusoids with random frequency and phase.
struct Wave {
  double f1, f2, p1, p2;
  explicit Wave(Rng& rng)
      : f1(0.15 + 0.35 * rng.uniform()), f2(0.4 + 0.6 * rng.uniform()),
        p1(2 * std::numbers::pi * rng.uniform()), p2(2 * std::numbers::pi * rng.uniform()) {}
  double operator()(double t) const {
    return 0.7 * std::sin(2 * std::numbers::pi * f1 * t + p1) + 0.3 * std::sin(2 * std::numbers::pi * f2 * t + p2);
  }
};

}  // namespace

SyntheticClip make_synthetic_clip(const FaceModel& model, const SyntheticClipOptions& o) {
  Rng rng(o.seed);
  SyntheticClip clip;
  if (o.identity) {
    clip.identity = *o.identity;
  } else {
    clip.identity = IdentityParams::zero(model);
    for (Eigen::Index i = 0; i < clip.identity.alpha.size(); ++i) clip.identity.alpha[i] = o.identity_sigma * rng.normal();
  }

  const Wave yaw(rng), pitch(rng), roll(rng), scale_wave(rng), tx(rng), ty(rng);
  std::vector<Wave> exp_waves;
  for (int k = 0; k < model.exp_count; ++k) exp_waves.emplace_back(rng);
  const Wave gl_u(rng), gl_v(rng), gr_u(rng), gr_v(rng);

  const double deg = std::numbers::pi / 180.0;
  const double base_scale = o.face_scale * std::min(o.width, o.height);
  const Eigen::Vector2d center(0.5 * o.width, 0.5 * o.height);

  for (int f = 0; f < o.frames; ++f) {
    const double t = f / o.fps;
    Pose pose;
    pose.rotation = Eigen::AngleAxisd(o.yaw_deg * deg * yaw(t), Eigen::Vector3d::UnitY()) *
                    Eigen::AngleAxisd(o.pitch_deg * deg * pitch(t), Eigen::Vector3d::UnitX()) *
                    Eigen::AngleAxisd(o.roll_deg * deg * roll(t), Eigen::Vector3d::UnitZ());
    pose.rotation.normalize();
    pose.scale = base_scale * (1.0 + 0.05 * scale_wave(t));
    pose.translation = center + Eigen::Vector2d(0.04 * o.width * tx(t), 0.04 * o.height * ty(t));

    ExpressionParams exp = ExpressionParams::zero(model);
    for (int k = 0; k < model.exp_count; ++k) exp.beta[k] = o.expression_amplitude * exp_waves[k](t);

    GazeState gaze;
    gaze.left = {Eigen::Vector2d(o.gaze_amplitude * gl_u(t), 0.5 * o.gaze_amplitude * gl_v(t)), true};
    gaze.right = {Eigen::Vector2d(o.gaze_amplitude * gr_u(t), 0.5 * o.gaze_amplitude * gr_v(t)), true};

    LandmarkFrame lf;
    lf.t = t;
    lf.width = o.width;
    lf.height = o.height;
    const Points2 clean = project(pose, landmark_positions(model, clip.identity, exp));
    lf.points = clean;
    if (o.noise_px > 0.0)
      for (Eigen::Index i = 0; i < lf.points.size(); ++i) lf.points.data()[i] += o.noise_px * rng.normal();

    if (o.with_iris) {
      std::array<Eigen::Vector2d, 2> iris;
      for (int e = 0; e < 2; ++e) {
        const int first = e == 0 ? 36 : 42;
        Eigen::Vector2d lo = clean.row(first).transpose(), hi = lo;
        for (int i = first; i < first + 6; ++i) {
          lo = lo.cwiseMin(clean.row(i).transpose());
          hi = hi.cwiseMax(clean.row(i).transpose());
        }
        const Eigen::Vector2d off = e == 0 ? gaze.left.offset : gaze.right.offset;
        iris[e] = 0.5 * (lo + hi) + 0.5 * off.cwiseProduct(hi - lo);
        if (o.noise_px > 0.0) iris[e] += o.noise_px * Eigen::Vector2d(rng.normal(), rng.normal());
      }
      lf.iris = iris;
    }

    clip.poses.push_back(pose);
    clip.expressions.push_back(exp);
    clip.gaze.push_back(gaze);
    clip.frames.push_back(std::move(lf));
  }
  return clip;
}

}  // namespace reenact

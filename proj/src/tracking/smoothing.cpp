#include <cmath>
#include <numbers>

#include "reenact/tracking.hpp"

namespace reenact {
namespace {

double smoothing_factor(double cutoff_hz, double dt) {
  const double tau = 1.0 / (2.0 * std::numbers::pi * cutoff_hz);
  return 1.0 / (1.0 + tau / dt);
}

}  // namespace

OneEuroSmoother::Result OneEuroSmoother::smooth(const Eigen::VectorXd& x, double t) {
  if (!last_t_ || value_.size() != x.size()) {
    last_t_ = t;
    value_ = x;
    derivative_ = Eigen::VectorXd::Zero(x.size());
    return {value_, false};
  }
  if (!(t > *last_t_)) return {value_, true};

  const double dt = t - *last_t_;
  const double a_d = smoothing_factor(cfg_.d_cutoff_hz, dt);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double dx = (x[i] - value_[i]) / dt;
    derivative_[i] = derivative_[i] + a_d * (dx - derivative_[i]);
    const double cutoff = cfg_.min_cutoff_hz + cfg_.beta * std::abs(derivative_[i]);
    const double a = smoothing_factor(cutoff, dt);
    value_[i] = value_[i] + a * (x[i] - value_[i]);
  }
  last_t_ = t;
  return {value_, false};
}

void OneEuroSmoother::reset() {
  last_t_.reset();
  value_.resize(0);
  derivative_.resize(0);
}

TrackedFrame FrameSmoother::smooth(const TrackedFrame& raw, bool* warning) {
  const Eigen::Index k = raw.expression.beta.size();
  Eigen::VectorXd x(7 + k + 4);

  Eigen::Quaterniond q = raw.pose.rotation;
  if (last_rotation_ && last_rotation_->coeffs().dot(q.coeffs()) < 0.0) q.coeffs() *= -1.0;
  x.head<4>() = q.coeffs();
  x[4] = raw.pose.scale;
  x.segment<2>(5) = raw.pose.translation;
  x.segment(7, k) = raw.expression.beta;
  x.segment<2>(7 + k) = raw.gaze.left.offset;
  x.segment<2>(9 + k) = raw.gaze.right.offset;

  const OneEuroSmoother::Result r = filter_.smooth(x, raw.t);
  if (warning) *warning = r.warning;

  TrackedFrame out = raw;
  out.pose.rotation.coeffs() = r.values.head<4>();
  out.pose.rotation.normalize();
  out.pose.scale = r.values[4];
  out.pose.translation = r.values.segment<2>(5);
  out.expression.beta = r.values.segment(7, k);
  out.gaze.left.offset = r.values.segment<2>(7 + k).cwiseMax(-1.0).cwiseMin(1.0);
  out.gaze.right.offset = r.values.segment<2>(9 + k).cwiseMax(-1.0).cwiseMin(1.0);
  last_rotation_ = out.pose.rotation;
  return out;
}

}  // namespace reenact

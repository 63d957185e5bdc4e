#include <algorithm>

#include "reenact/tracking.hpp"

namespace reenact {
namespace {

EyeGaze eye_offset(const LandmarkFrame& frame, int first, const Eigen::Vector2d* iris, const EyeGaze& previous) {
  EyeGaze out{previous.offset, false};
  if (iris == nullptr || !iris->allFinite()) return out;
  Eigen::Vector2d lo = frame.points.row(first).transpose(), hi = lo;
  for (int i = first; i < first + 6; ++i) {
    lo = lo.cwiseMin(frame.points.row(i).transpose());
    hi = hi.cwiseMax(frame.points.row(i).transpose());
  }
  const Eigen::Vector2d size = hi - lo;
  if (!(size.x() > 0.0) || !(size.y() > 0.0) || !size.allFinite()) return out;
  const Eigen::Vector2d center = 0.5 * (lo + hi);
  out.offset = (2.0 * (*iris - center).array() / size.array()).cwiseMax(-1.0).cwiseMin(1.0).matrix();
  out.valid = true;
  return out;
}

}  // namespace

GazeState estimate_gaze(const LandmarkFrame& frame, const GazeState& previous) {
  GazeState g;
  const Eigen::Vector2d* left = frame.iris ? &(*frame.iris)[0] : nullptr;
  const Eigen::Vector2d* right = frame.iris ? &(*frame.iris)[1] : nullptr;
  g.left = eye_offset(frame, 36, left, previous.left);
  g.right = eye_offset(frame, 42, right, previous.right);
  return g;
}

}  // namespace reenact

#include <algorithm>
#include <cmath>
#include <vector>

#include "reenact/conditioning.hpp"
#include "reenact/error.hpp"

namespace reenact {
namespace {

/// Smallest integer x with x + 0.5 >= v.
int first_center_at_or_after(double v) {
  int x = static_cast<int>(std::ceil(v - 0.5));
  while (x + 0.5 < v) ++x;
  while (x - 0.5 >= v) --x;
  return x;
}

void fill_polygon(const Points2& poly, Image& img, int channel) {
  const auto n = poly.rows();
  std::vector<double> xs;
  for (int y = 0; y < img.height; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ax = poly(i, 0), ay = poly(i, 1);
      const double bx = poly((i + 1) % n, 0), by = poly((i + 1) % n, 1);
      if (ay == by) continue;
      if (yc < std::min(ay, by) || yc >= std::max(ay, by)) continue;
      xs.push_back(ax + (yc - ay) * (bx - ax) / (by - ay));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel centers in [xs[k], xs[k+1]).
      const int lo = std::max(0, first_center_at_or_after(xs[k]));
      const int hi = std::min(img.width, first_center_at_or_after(xs[k + 1]));
      for (int x = lo; x < hi; ++x) img.rgb[3 * (static_cast<std::size_t>(y) * img.width + x) + channel] = 255;
    }
  }
}

void fill_disc(double cx, double cy, double r, Image& img, int channel) {
  if (!(r > 0.0) || !std::isfinite(cx) || !std::isfinite(cy)) return;
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
  const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(cy + r)));
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
  const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(cx + r)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      if (dx * dx + dy * dy <= r * r) img.rgb[3 * (static_cast<std::size_t>(y) * img.width + x) + channel] = 255;
    }
}

void draw_eye(const EyeGaze& eye, const Points2& contour, Image& img, int channel) {
  if (contour.rows() < 3) throw Error(ErrorCode::InvalidArgument, "eye contour needs at least 3 points");
  if (!eye.valid || !contour.allFinite()) return;
  fill_polygon(contour, img, channel);
  const Eigen::Vector2d lo = contour.colwise().minCoeff().transpose();
  const Eigen::Vector2d hi = contour.colwise().maxCoeff().transpose();
  const Eigen::Vector2d center = 0.5 * (lo + hi);
  const Eigen::Vector2d half = 0.5 * (hi - lo);
  const Eigen::Vector2d pupil = center + eye.offset.cwiseProduct(half);
  fill_disc(pupil.x(), pupil.y(), 0.15 * (hi.x() - lo.x()), img, 1);
}

Points2 gather(const Points2& pixels, const std::vector<std::uint32_t>& idx) {
  Points2 out(idx.size(), 2);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= pixels.rows()) throw Error(ErrorCode::IndexOutOfRange, "eye contour index");
    out.row(i) = pixels.row(idx[i]);
  }
  return out;
}

}  // namespace

GazeMap render_gaze_map(const GazeState& gaze, const Points2& left_contour, const Points2& right_contour,
                        const RasterSettings& settings) {
  settings.validate();
  GazeMap map{Image(settings.width, settings.height)};
  draw_eye(gaze.left, left_contour, map.pixels, 0);
  draw_eye(gaze.right, right_contour, map.pixels, 2);
  return map;
}

GazeMap render_gaze_map(const FaceModel& model, const TrackedFrame& frame, const ProjectedFace& face,
                        const RasterSettings& settings) {
  return render_gaze_map(frame.gaze, gather(face.pixels, model.eye_meta.left_contour),
                         gather(face.pixels, model.eye_meta.right_contour), settings);
}

}  // namespace reenact

#include <algorithm>
#include <cmath>

#include "reenact/conditioning.hpp"
#include "reenact/error.hpp"

namespace reenact {

namespace {

constexpr int kMouthFirst = 48;
constexpr int kMouthLast = 67;

void check_frame(const FaceModel& model, const TrackedFrame& frame) {
  if (!frame.model_name.empty() && frame.model_name != model.name)
    throw Error(ErrorCode::ModelMismatch, "frame tracked with model '" + frame.model_name + "'");
}

}  // namespace

ProjectedFace project_face(const FaceModel& model, const TrackedFrame& frame) {
  check_frame(model, frame);
  const Mesh mesh = synthesize_shape(model, frame.identity, frame.expression);
  ProjectedFace face;
  project_with_depth(frame.pose, mesh.vertices, face.pixels, face.depth);
  return face;
}

NmfcImage render_nmfc(const FaceModel& model, const ProjectedFace& face, const NmfcPalette& palette,
                      const RasterSettings& settings) {
  return rasterize(face.pixels, face.depth, palette, model.triangles, settings);
}

NmfcImage render_nmfc(const FaceModel& model, const TrackedFrame& frame, const RasterSettings& settings) {
  return render_nmfc(model, project_face(model, frame), nmfc_palette(model), settings);
}

Rect mouth_roi(const FaceModel& model, const ProjectedFace& face, const RasterSettings& settings) {
  settings.validate();
  double x0 = INFINITY, y0 = INFINITY, x1 = -INFINITY, y1 = -INFINITY;
  for (int i = kMouthFirst; i <= kMouthLast; ++i) {
    const auto p = face.pixels.row(model.landmark_map[i]);
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  }
  if (!(std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) && std::isfinite(y1))) return {};
  const double w = x1 - x0, h = y1 - y0;
  x0 -= 0.2 * w;
  x1 += 0.2 * w;
  y0 -= 0.2 * h;
  y1 += 0.2 * h;
  const double side = std::max(x1 - x0, y1 - y0);
  const double sx = 0.5 * (x0 + x1) - 0.5 * side, sy = 0.5 * (y0 + y1) - 0.5 * side;

  // Integer square covering [sx, sx+side] × [sy, sy+side], then clipped.
  const double lx = std::floor(sx), ly = std::floor(sy);
  const double size = std::max(std::ceil(sx + side) - lx, std::ceil(sy + side) - ly);
  auto clip = [](double v, int hi) { return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(hi))); };
  const int rx0 = clip(lx, settings.width), rx1 = clip(lx + size, settings.width);
  const int ry0 = clip(ly, settings.height), ry1 = clip(ly + size, settings.height);
  return {rx0, ry0, rx1 - rx0, ry1 - ry0};
}

Rect mouth_roi(const FaceModel& model, const TrackedFrame& frame, const RasterSettings& settings) {
  return mouth_roi(model, project_face(model, frame), settings);
}

ConditioningFrame render_conditioning(const FaceModel& model, const TrackedFrame& frame, const NmfcPalette& palette,
                                      const RasterSettings& settings) {
  const ProjectedFace face = project_face(model, frame);
  ConditioningFrame out;
  out.t = frame.t;
  out.nmfc = render_nmfc(model, face, palette, settings);
  out.gaze = render_gaze_map(model, frame, face, settings);
  out.mouth_roi = mouth_roi(model, face, settings);
  return out;
}

}  // namespace reenact

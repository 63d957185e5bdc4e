#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reenact/simd/kernels.hpp"
#include "reenact/tracking.hpp"

namespace reenact {

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb8&) const = default;
};

/// Packed 8-bit RGB, row-major, no padding.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, Rgb8 fill = {});
  Rgb8 at(int x, int y) const {
    const std::uint8_t* p = rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    return {p[0], p[1], p[2]};
  }
  bool operator==(const Image&) const = default;
};

struct RasterSettings {
  int width = 256;
  int height = 256;
  Rgb8 background;
  bool cull_backfaces = true;

  void validate() const;
  bool operator==(const RasterSettings&) const = default;
};

/// Rasterizer coordinates are snapped to 1/16 pixel; triangles reaching
/// beyond this many pixels from the origin are skipped.
inline constexpr int kSubpixelBits = 4;
inline constexpr double kMaxRasterCoord = 65536.0;

struct NmfcImage {
  Image pixels;
  std::vector<double> depth;           // camera-space z per pixel, +inf where uncovered
  std::vector<std::uint8_t> covered;   // 1 where a drawn triangle won the depth test
};

struct GazeMap {
  Image pixels;  // R: left eyelid, B: right eyelid, G: pupils
};

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const Rect&) const = default;
};

struct ConditioningFrame {
  double t = 0.0;
  NmfcImage nmfc;
  GazeMap gaze;
  Rect mouth_roi;
};

/// Z-buffered rasterization with the top-left fill rule. Pixel (x, y) is
/// sampled at (x + 0.5, y + 0.5); smaller z wins, ties keep the earlier
/// triangle. Colors are interpolated barycentrically and rounded half up.
/// Triangles that are clockwise on screen (y down) are back faces.
NmfcImage rasterize(const Points2& mesh2d, const Eigen::VectorXd& depths, const NmfcPalette& colors,
                    const std::vector<Triangle>& triangles, const RasterSettings& settings,
                    const simd::Kernels* kernels = nullptr);

/// Projected mesh of a tracked frame, shared by the renderers below.
struct ProjectedFace {
  Points2 pixels;
  Eigen::VectorXd depth;
};
ProjectedFace project_face(const FaceModel& model, const TrackedFrame& frame);

NmfcImage render_nmfc(const FaceModel& model, const TrackedFrame& frame, const RasterSettings& settings);
NmfcImage render_nmfc(const FaceModel& model, const ProjectedFace& face, const NmfcPalette& palette,
                      const RasterSettings& settings);

/// Even-odd scanline fill of both eyelid polygons plus pupil discs of radius
/// 0.15 × eye-box width centered at box center + offset · half extents.
GazeMap render_gaze_map(const GazeState& gaze, const Points2& left_contour, const Points2& right_contour,
                        const RasterSettings& settings);
GazeMap render_gaze_map(const FaceModel& model, const TrackedFrame& frame, const ProjectedFace& face,
                        const RasterSettings& settings);

/// Square crop around the projected mouth landmarks (iBUG 48-67), expanded by
/// 20% per side and clipped to the image.
Rect mouth_roi(const FaceModel& model, const TrackedFrame& frame, const RasterSettings& settings);
Rect mouth_roi(const FaceModel& model, const ProjectedFace& face, const RasterSettings& settings);

/// All three conditioning products from one synthesis and projection.
ConditioningFrame render_conditioning(const FaceModel& model, const TrackedFrame& frame, const NmfcPalette& palette,
                                      const RasterSettings& settings);

// PNG (8-bit RGB, fixed encoder settings).
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::vector<std::uint8_t>& bytes);
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

struct ExportItem {
  const ConditioningFrame* frame = nullptr;
  std::optional<Image> real;
};

struct Manifest {
  int count = 0;
  int width = 0;
  int height = 0;
  double fps = 0.0;
  std::vector<Rect> mouth_rois;
  std::string profile_label;

  std::string to_json() const;
  static Manifest from_json(const std::string& text);
};

/// Writes nmfc/%06d.png, gaze/%06d.png, real/%06d.png (when given) and
/// manifest.json under `dir`.
Manifest export_sequence(const std::filesystem::path& dir, const std::vector<ExportItem>& items, double fps,
                         const std::string& profile_label);

}  // namespace reenact

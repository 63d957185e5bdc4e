#include <algorithm>
#include <cmath>
#include <limits>

#include "reenact/conditioning.hpp"
#include "reenact/error.hpp"

namespace reenact {

Image::Image(int w, int h, Rgb8 fill) : width(w), height(h), rgb(3 * static_cast<std::size_t>(w) * h) {
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill.r;
    rgb[i + 1] = fill.g;
    rgb[i + 2] = fill.b;
  }
}

void RasterSettings::validate() const {
  if (width < 16 || height < 16) throw Error(ErrorCode::InvalidArgument, "raster size must be at least 16x16");
}

namespace {

constexpr std::int64_t kSub = std::int64_t{1} << kSubpixelBits;
constexpr std::int64_t kHalf = kSub / 2;

struct Snapped {
  std::int64_t x, y;
};

bool snap(double x, double y, Snapped& out) {
  if (!(std::abs(x) <= kMaxRasterCoord) || !(std::abs(y) <= kMaxRasterCoord)) return false;
  out.x = static_cast<std::int64_t>(std::floor(x * kSub + 0.5));
  out.y = static_cast<std::int64_t>(std::floor(y * kSub + 0.5));
  return true;
}

/// Positive on the interior side of a→b once the triangle has positive area.
std::int64_t edge(const Snapped& a, const Snapped& b, std::int64_t px, std::int64_t py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

bool top_left(const Snapped& a, const Snapped& b) {
  const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
  return (dy == 0 && dx > 0) || dy < 0;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

NmfcImage rasterize(const Points2& mesh2d, const Eigen::VectorXd& depths, const NmfcPalette& colors,
                    const std::vector<Triangle>& triangles, const RasterSettings& settings,
                    const simd::Kernels* kernels) {
  settings.validate();
  const auto n = mesh2d.rows();
  if (depths.size() != n || colors.colors.rows() != n)
    throw Error(ErrorCode::LengthMismatch, "vertex, depth and color counts differ");
  const simd::Kernels& k = kernels ? *kernels : simd::active_kernels();

  const int w = settings.width, h = settings.height;
  NmfcImage img;
  img.pixels = Image(w, h, settings.background);
  img.depth.assign(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
  img.covered.assign(static_cast<std::size_t>(w) * h, 0);

  for (const Triangle& tri : triangles) {
    std::uint32_t idx[3] = {tri[0], tri[1], tri[2]};
    if (idx[0] >= n || idx[1] >= n || idx[2] >= n) throw Error(ErrorCode::IndexOutOfRange, "triangle index");
    Snapped v[3];
    bool ok = true;
    for (int i = 0; i < 3; ++i) ok = ok && snap(mesh2d(idx[i], 0), mesh2d(idx[i], 1), v[i]);
    if (!ok) continue;

    std::int64_t area = edge(v[0], v[1], v[2].x, v[2].y);
    if (area == 0) continue;
    if (area < 0) {
      // Counter-clockwise on screen: front face. Reorder to positive area.
      std::swap(v[1], v[2]);
      std::swap(idx[1], idx[2]);
      area = -area;
    } else if (settings.cull_backfaces) {
      continue;
    }

    const std::int64_t min_x = std::min({v[0].x, v[1].x, v[2].x}), max_x = std::max({v[0].x, v[1].x, v[2].x});
    const std::int64_t min_y = std::min({v[0].y, v[1].y, v[2].y}), max_y = std::max({v[0].y, v[1].y, v[2].y});
    // Pixel centers lie at kSub * p + kHalf.
    const std::int64_t x0 = std::max<std::int64_t>(0, floor_div(min_x - kHalf, kSub));
    const std::int64_t x1 = std::min<std::int64_t>(w - 1, floor_div(max_x - kHalf, kSub) + 1);
    const std::int64_t y0 = std::max<std::int64_t>(0, floor_div(min_y - kHalf, kSub));
    const std::int64_t y1 = std::min<std::int64_t>(h - 1, floor_div(max_y - kHalf, kSub) + 1);
    if (x0 > x1 || y0 > y1) continue;

    simd::SpanSetup s{};
    s.dx0 = static_cast<double>(-(v[2].y - v[1].y) * kSub);
    s.dx1 = static_cast<double>(-(v[0].y - v[2].y) * kSub);
    s.dx2 = static_cast<double>(-(v[1].y - v[0].y) * kSub);
    s.bias0 = top_left(v[1], v[2]) ? 1.0 : 0.0;
    s.bias1 = top_left(v[2], v[0]) ? 1.0 : 0.0;
    s.bias2 = top_left(v[0], v[1]) ? 1.0 : 0.0;
    s.inv_area = 1.0 / static_cast<double>(area);
    s.z0 = depths[idx[0]];
    s.dz1 = depths[idx[1]] - depths[idx[0]];
    s.dz2 = depths[idx[2]] - depths[idx[0]];
    for (int c = 0; c < 3; ++c) {
      s.c0[c] = colors.colors(idx[0], c);
      s.dc1[c] = colors.colors(idx[1], c) - colors.colors(idx[0], c);
      s.dc2[c] = colors.colors(idx[2], c) - colors.colors(idx[0], c);
    }

    const std::int64_t px = x0 * kSub + kHalf;
    const std::size_t count = static_cast<std::size_t>(x1 - x0 + 1);
    for (std::int64_t y = y0; y <= y1; ++y) {
      const std::int64_t py = y * kSub + kHalf;
      s.e0 = static_cast<double>(edge(v[1], v[2], px, py));
      s.e1 = static_cast<double>(edge(v[2], v[0], px, py));
      s.e2 = static_cast<double>(edge(v[0], v[1], px, py));
      const std::size_t offset = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x0);
      k.raster_span(s, count, img.depth.data() + offset, img.pixels.rgb.data() + 3 * offset,
                    img.covered.data() + offset);
    }
  }
  return img;
}

}  // namespace reenact

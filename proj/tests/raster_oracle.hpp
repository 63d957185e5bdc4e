#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "reenact/conditioning.hpp"

namespace test {

using namespace reenact;

inline std::size_t at(const Image& img, int x, int y) { return static_cast<std::size_t>(y) * img.width + x; }

// ---------------------------------------------------------------------------
// Brute-force rasterizer: every pixel against every triangle.

struct Fixed {
  long long x, y;
};

inline bool to_fixed(double x, double y, Fixed& f) {
  if (!(std::abs(x) <= 65536.0 && std::abs(y) <= 65536.0)) return false;
  f = {static_cast<long long>(std::floor(x * 16.0 + 0.5)), static_cast<long long>(std::floor(y * 16.0 + 0.5))};
  return true;
}

inline long long edge_fn(Fixed a, Fixed b, long long px, long long py) {
  return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

inline bool owns_edge(Fixed a, Fixed b) { return (b.y < a.y) || (b.y == a.y && b.x > a.x); }

inline NmfcImage brute_force(const Points2& px, const Eigen::VectorXd& depth, const NmfcPalette& pal,
                      const std::vector<Triangle>& tris, const RasterSettings& rs) {
  NmfcImage out;
  out.pixels = Image(rs.width, rs.height, rs.background);
  out.depth.assign(static_cast<std::size_t>(rs.width) * rs.height, std::numeric_limits<double>::infinity());
  out.covered.assign(out.depth.size(), 0);
  for (int y = 0; y < rs.height; ++y)
    for (int x = 0; x < rs.width; ++x) {
      const long long cx = 16LL * x + 8, cy = 16LL * y + 8;
      for (const Triangle& t : tris) {
        std::uint32_t id[3] = {t[0], t[1], t[2]};
        const double fx = x + 0.5, fy = y + 0.5;
        if (fx < std::min({px(id[0], 0), px(id[1], 0), px(id[2], 0)}) - 1 ||
            fx > std::max({px(id[0], 0), px(id[1], 0), px(id[2], 0)}) + 1 ||
            fy < std::min({px(id[0], 1), px(id[1], 1), px(id[2], 1)}) - 1 ||
            fy > std::max({px(id[0], 1), px(id[1], 1), px(id[2], 1)}) + 1)
          continue;
        Fixed v[3];
        if (!to_fixed(px(id[0], 0), px(id[0], 1), v[0]) || !to_fixed(px(id[1], 0), px(id[1], 1), v[1]) ||
            !to_fixed(px(id[2], 0), px(id[2], 1), v[2]))
          continue;
        long long area = edge_fn(v[0], v[1], v[2].x, v[2].y);
        if (area == 0) continue;
        if (area > 0 && rs.cull_backfaces) continue;
        if (area < 0) {
          std::swap(v[1], v[2]);
          std::swap(id[1], id[2]);
          area = -area;
        }
        const long long w0 = edge_fn(v[1], v[2], cx, cy), w1 = edge_fn(v[2], v[0], cx, cy),
                        w2 = edge_fn(v[0], v[1], cx, cy);
        const bool in0 = w0 > 0 || (w0 == 0 && owns_edge(v[1], v[2]));
        const bool in1 = w1 > 0 || (w1 == 0 && owns_edge(v[2], v[0]));
        const bool in2 = w2 > 0 || (w2 == 0 && owns_edge(v[0], v[1]));
        if (!(in0 && in1 && in2)) continue;
        const double inv = 1.0 / static_cast<double>(area), e1 = static_cast<double>(w1),
                     e2 = static_cast<double>(w2);
        const double z = depth[id[0]] + (e1 * (depth[id[1]] - depth[id[0]]) + e2 * (depth[id[2]] - depth[id[0]])) * inv;
        const std::size_t i = at(out.pixels, x, y);
        if (!(z < out.depth[i])) continue;
        out.depth[i] = z;
        out.covered[i] = 1;
        for (int c = 0; c < 3; ++c) {
          const double a = pal.colors(id[0], c), b = pal.colors(id[1], c), d = pal.colors(id[2], c);
          const double v = a + (e1 * (b - a) + e2 * (d - a)) * inv;
          const double q = v * 255.0 + 0.5;
          out.pixels.rgb[3 * i + c] = q <= 0.0 ? 0 : q >= 255.0 ? 255 : static_cast<std::uint8_t>(q);
        }
      }
    }
  return out;
}

}  // namespace test

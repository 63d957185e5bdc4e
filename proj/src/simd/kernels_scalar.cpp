#include "reenact/simd/kernels.hpp"

namespace reenact::simd {
namespace {

void basis_gemv_scalar(const float* basis, std::size_t rows, std::size_t cols, const double* coeffs,
                       double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = basis + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += static_cast<double>(row[c]) * coeffs[c];
    out[r] += acc;
  }
}

void project_points_scalar(const double* xyz, std::size_t n, const double* rot, double scale, double tx,
                           double ty, double* xy, double* depth) {
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xyz[3 * i], y = xyz[3 * i + 1], z = xyz[3 * i + 2];
    const double rx = rot[0] * x + rot[1] * y + rot[2] * z;
    const double ry = rot[3] * x + rot[4] * y + rot[5] * z;
    const double rz = rot[6] * x + rot[7] * y + rot[8] * z;
    xy[2 * i] = scale * rx + tx;
    xy[2 * i + 1] = scale * ry + ty;
    depth[i] = rz;
  }
}

std::size_t raster_span_scalar(const SpanSetup& s, std::size_t count, double* zbuf, std::uint8_t* rgb,
                               std::uint8_t* covered) {
  std::size_t written = 0;
  double e0 = s.e0, e1 = s.e1, e2 = s.e2;
  for (std::size_t i = 0; i < count; ++i) {
    if (e0 + s.bias0 > 0.0 && e1 + s.bias1 > 0.0 && e2 + s.bias2 > 0.0) {
      const double z = s.z0 + (e1 * s.dz1 + e2 * s.dz2) * s.inv_area;
      if (z < zbuf[i]) {
        zbuf[i] = z;
        for (int c = 0; c < 3; ++c) {
          const double v = s.c0[c] + (e1 * s.dc1[c] + e2 * s.dc2[c]) * s.inv_area;
          rgb[3 * i + c] = quantize_channel(v);
        }
        covered[i] = 1;
        ++written;
      }
    }
    e0 += s.dx0;
    e1 += s.dx1;
    e2 += s.dx2;
  }
  return written;
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{Isa::Scalar, &basis_gemv_scalar, &project_points_scalar, &raster_span_scalar};
  return k;
}

}  // namespace reenact::simd

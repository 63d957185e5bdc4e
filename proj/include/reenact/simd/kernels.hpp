#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace reenact::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Per-triangle constants for one rasterizer span. Edge values are exact
/// integers held in doubles (see conditioning/rasterizer.cpp for the bounds
/// that keep them below 2^53).
struct SpanSetup {
  double e0, e1, e2;        // edge values at the first pixel of the span
  double dx0, dx1, dx2;     // increment per pixel step in x
  double bias0, bias1, bias2;  // 1 for top-left edges, 0 otherwise; inside iff e + bias > 0
  double inv_area;
  double z0, dz1, dz2;      // z = z0 + (e1*dz1 + e2*dz2) * inv_area
  double c0[3], dc1[3], dc2[3];
};

/// Function table for the data-parallel inner loops. Every entry has a scalar
/// reference implementation; vector variants must match it bit-for-bit, except
/// basis_gemv whose summation order differs (agreement to rounding only).
struct Kernels {
  Isa isa;

  /// out[r] += sum_c basis[r*cols + c] * coeffs[c].
  void (*basis_gemv)(const float* basis, std::size_t rows, std::size_t cols, const double* coeffs,
                     double* out);

  /// xy[2i..2i+1] = scale * (R p_i).xy + t ; depth[i] = (R p_i).z. rot is row-major 3×3.
  void (*project_points)(const double* xyz, std::size_t n, const double* rot, double scale, double tx,
                         double ty, double* xy, double* depth);

  /// Rasterizes `count` pixels of one row. A pixel is written when it is inside
  /// the triangle and its interpolated z is strictly below zbuf.
  /// Returns the number of pixels written.
  std::size_t (*raster_span)(const SpanSetup& setup, std::size_t count, double* zbuf, std::uint8_t* rgb,
                             std::uint8_t* covered);
};

const Kernels& scalar_kernels();

/// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const Kernels* avx2_kernels();

/// Kernels selected once at first use: the widest supported ISA, unless the
/// REENACT_SIMD environment variable is set to "scalar".
const Kernels& active_kernels();

/// Quantizes a [0,1] channel value to 8 bits, rounding half up.
inline std::uint8_t quantize_channel(double c) {
  double q = c * 255.0 + 0.5;
  if (!(q > 0.0)) return 0;
  if (q >= 255.0) return 255;
  return static_cast<std::uint8_t>(static_cast<int>(q));
}

}  // namespace reenact::simd

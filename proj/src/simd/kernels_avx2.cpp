// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "reenact/simd/kernels.hpp"

namespace reenact::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void basis_gemv_avx2(const float* basis, std::size_t rows, std::size_t cols, const double* coeffs,
                     double* out) {
  const std::size_t vec_cols = cols & ~std::size_t{3};
  for (std::size_t r = 0; r < rows; ++r) {
    const float* row = basis + r * cols;
    __m256d acc = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c < vec_cols; c += 4) {
      const __m256d b = _mm256_cvtps_pd(_mm_loadu_ps(row + c));
      acc = _mm256_fmadd_pd(b, _mm256_loadu_pd(coeffs + c), acc);
    }
    double tail = 0.0;
    for (; c < cols; ++c) tail += static_cast<double>(row[c]) * coeffs[c];
    out[r] += hsum(acc) + tail;
  }
}

// Same operation order as the scalar kernel; no contraction, so results are identical.
void project_points_avx2(const double* xyz, std::size_t n, const double* rot, double scale, double tx,
                         double ty, double* xy, double* depth) {
  const __m256i idx = _mm256_setr_epi64x(0, 3, 6, 9);
  const __m256d r0 = _mm256_set1_pd(rot[0]), r1 = _mm256_set1_pd(rot[1]), r2 = _mm256_set1_pd(rot[2]);
  const __m256d r3 = _mm256_set1_pd(rot[3]), r4 = _mm256_set1_pd(rot[4]), r5 = _mm256_set1_pd(rot[5]);
  const __m256d r6 = _mm256_set1_pd(rot[6]), r7 = _mm256_set1_pd(rot[7]), r8 = _mm256_set1_pd(rot[8]);
  const __m256d vs = _mm256_set1_pd(scale), vtx = _mm256_set1_pd(tx), vty = _mm256_set1_pd(ty);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double* p = xyz + 3 * i;
    const __m256d x = _mm256_i64gather_pd(p, idx, 8);
    const __m256d y = _mm256_i64gather_pd(p + 1, idx, 8);
    const __m256d z = _mm256_i64gather_pd(p + 2, idx, 8);
    const __m256d rx = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r0, x), _mm256_mul_pd(r1, y)), _mm256_mul_pd(r2, z));
    const __m256d ry = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r3, x), _mm256_mul_pd(r4, y)), _mm256_mul_pd(r5, z));
    const __m256d rz = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r6, x), _mm256_mul_pd(r7, y)), _mm256_mul_pd(r8, z));
    const __m256d px = _mm256_add_pd(_mm256_mul_pd(vs, rx), vtx);
    const __m256d py = _mm256_add_pd(_mm256_mul_pd(vs, ry), vty);
    // [x0 y0 x2 y2], [x1 y1 x3 y3] -> [x0 y0 x1 y1], [x2 y2 x3 y3]
    const __m256d lo = _mm256_unpacklo_pd(px, py);
    const __m256d hi = _mm256_unpackhi_pd(px, py);
    _mm256_storeu_pd(xy + 2 * i, _mm256_permute2f128_pd(lo, hi, 0x20));
    _mm256_storeu_pd(xy + 2 * i + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
    _mm256_storeu_pd(depth + i, rz);
  }
  if (i < n) scalar_kernels().project_points(xyz + 3 * i, n - i, rot, scale, tx, ty, xy + 2 * i, depth + i);
}

std::size_t raster_span_avx2(const SpanSetup& s, std::size_t count, double* zbuf, std::uint8_t* rgb,
                             std::uint8_t* covered) {
  const __m256d lane = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d dx0 = _mm256_set1_pd(s.dx0), dx1 = _mm256_set1_pd(s.dx1), dx2 = _mm256_set1_pd(s.dx2);
  // Edge values are exact integers, so e + k*dx equals k repeated additions.
  __m256d e0 = _mm256_add_pd(_mm256_set1_pd(s.e0), _mm256_mul_pd(lane, dx0));
  __m256d e1 = _mm256_add_pd(_mm256_set1_pd(s.e1), _mm256_mul_pd(lane, dx1));
  __m256d e2 = _mm256_add_pd(_mm256_set1_pd(s.e2), _mm256_mul_pd(lane, dx2));
  const __m256d step0 = _mm256_mul_pd(four, dx0), step1 = _mm256_mul_pd(four, dx1),
                step2 = _mm256_mul_pd(four, dx2);
  const __m256d b0 = _mm256_set1_pd(s.bias0), b1 = _mm256_set1_pd(s.bias1), b2 = _mm256_set1_pd(s.bias2);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d z0 = _mm256_set1_pd(s.z0), dz1 = _mm256_set1_pd(s.dz1), dz2 = _mm256_set1_pd(s.dz2);
  const __m256d inv_area = _mm256_set1_pd(s.inv_area);

  std::size_t written = 0;
  std::size_t i = 0;
  alignas(32) double e1v[4], e2v[4];
  for (; i + 4 <= count; i += 4) {
    const __m256d in0 = _mm256_cmp_pd(_mm256_add_pd(e0, b0), zero, _CMP_GT_OQ);
    const __m256d in1 = _mm256_cmp_pd(_mm256_add_pd(e1, b1), zero, _CMP_GT_OQ);
    const __m256d in2 = _mm256_cmp_pd(_mm256_add_pd(e2, b2), zero, _CMP_GT_OQ);
    const __m256d inside = _mm256_and_pd(_mm256_and_pd(in0, in1), in2);
    if (_mm256_movemask_pd(inside) != 0) {
      const __m256d z = _mm256_add_pd(
          z0, _mm256_mul_pd(_mm256_add_pd(_mm256_mul_pd(e1, dz1), _mm256_mul_pd(e2, dz2)), inv_area));
      const __m256d old = _mm256_loadu_pd(zbuf + i);
      const __m256d pass = _mm256_and_pd(inside, _mm256_cmp_pd(z, old, _CMP_LT_OQ));
      const int mask = _mm256_movemask_pd(pass);
      if (mask != 0) {
        _mm256_storeu_pd(zbuf + i, _mm256_blendv_pd(old, z, pass));
        _mm256_store_pd(e1v, e1);
        _mm256_store_pd(e2v, e2);
        for (int k = 0; k < 4; ++k) {
          if (!(mask & (1 << k))) continue;
          std::uint8_t* px = rgb + 3 * (i + k);
          for (int c = 0; c < 3; ++c) {
            const double v = s.c0[c] + (e1v[k] * s.dc1[c] + e2v[k] * s.dc2[c]) * s.inv_area;
            px[c] = quantize_channel(v);
          }
          covered[i + k] = 1;
          ++written;
        }
      }
    }
    e0 = _mm256_add_pd(e0, step0);
    e1 = _mm256_add_pd(e1, step1);
    e2 = _mm256_add_pd(e2, step2);
  }
  if (i < count) {
    SpanSetup rest = s;
    rest.e0 = _mm256_cvtsd_f64(e0);
    rest.e1 = _mm256_cvtsd_f64(e1);
    rest.e2 = _mm256_cvtsd_f64(e2);
    written += scalar_kernels().raster_span(rest, count - i, zbuf + i, rgb + 3 * i, covered + i);
  }
  return written;
}

}  // namespace

const Kernels& avx2_kernels_impl() {
  static const Kernels k{Isa::Avx2, &basis_gemv_avx2, &project_points_avx2, &raster_span_avx2};
  return k;
}

}  // namespace reenact::simd

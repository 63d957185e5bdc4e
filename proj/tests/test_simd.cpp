#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <random>

#include "reenact/conditioning.hpp"
#include "reenact/simd/kernels.hpp"
#include "support.hpp"

using namespace reenact;
using reenact::simd::Kernels;

namespace {

const Kernels* vector_kernels() {
  const Kernels* k = simd::avx2_kernels();
  if (!k) MESSAGE("AVX2 kernels unavailable on this machine; equivalence checks skipped");
  return k;
}

}  // namespace

TEST_CASE("active kernel selection") {
  const char* env = std::getenv("REENACT_SIMD");
  const Kernels& active = simd::active_kernels();
  if (env && std::string(env) == "scalar") {
    CHECK(active.isa == simd::Isa::Scalar);
  } else if (simd::avx2_kernels()) {
    CHECK(active.isa == simd::Isa::Avx2);
  } else {
    CHECK(active.isa == simd::Isa::Scalar);
  }
  CHECK(simd::to_string(simd::Isa::Scalar) == "scalar");
  CHECK(simd::to_string(simd::Isa::Avx2) == "avx2");
}

TEST_CASE("quantize_channel rounds half up and saturates") {
  CHECK(simd::quantize_channel(0.0) == 0);
  CHECK(simd::quantize_channel(1.0) == 255);
  CHECK(simd::quantize_channel(-3.0) == 0);
  CHECK(simd::quantize_channel(7.0) == 255);
  CHECK(simd::quantize_channel(std::nan("")) == 0);
  CHECK(simd::quantize_channel(0.5) == 128);
  CHECK(simd::quantize_channel(1.5 / 255.0) == 2);
  for (int v = 0; v <= 255; ++v) CHECK(simd::quantize_channel(v / 255.0) == v);
}

TEST_CASE("basis_gemv agrees to rounding") {
  const Kernels& s = simd::scalar_kernels();
  const Kernels* v = vector_kernels();
  if (!v) return;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (std::size_t rows : {1u, 3u, 7u, 300u, 9000u})
    for (std::size_t cols : {1u, 3u, 4u, 5u, 8u, 13u, 20u, 33u}) {
      std::vector<float> basis(rows * cols);
      for (float& f : basis) f = static_cast<float>(g(rng));
      std::vector<double> coeffs(cols), a(rows), b(rows);
      for (double& c : coeffs) c = g(rng);
      for (std::size_t r = 0; r < rows; ++r) a[r] = b[r] = g(rng);
      s.basis_gemv(basis.data(), rows, cols, coeffs.data(), a.data());
      v->basis_gemv(basis.data(), rows, cols, coeffs.data(), b.data());
      for (std::size_t r = 0; r < rows; ++r) {
        double mag = 1.0;
        for (std::size_t c = 0; c < cols; ++c) mag += std::abs(basis[r * cols + c] * coeffs[c]);
        REQUIRE(std::abs(a[r] - b[r]) <= 1e-14 * mag);
      }
    }
}

TEST_CASE("project_points is bit-identical") {
  const Kernels& s = simd::scalar_kernels();
  const Kernels* v = vector_kernels();
  if (!v) return;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  for (std::size_t n = 0; n < 40; ++n) {
    std::vector<double> xyz(3 * n);
    for (double& x : xyz) x = g(rng);
    const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> rot = test::random_rotation(rng, 90.0).toRotationMatrix();
    const double scale = 50.0 + 100.0 * std::abs(g(rng)), tx = 100 * g(rng), ty = 100 * g(rng);
    std::vector<double> xy_a(2 * n, -1), xy_b(2 * n, -2), d_a(n, -1), d_b(n, -2);
    s.project_points(xyz.data(), n, rot.data(), scale, tx, ty, xy_a.data(), d_a.data());
    v->project_points(xyz.data(), n, rot.data(), scale, tx, ty, xy_b.data(), d_b.data());
    CHECK(std::memcmp(xy_a.data(), xy_b.data(), xy_a.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(d_a.data(), d_b.data(), d_a.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("raster_span is bit-identical") {
  const Kernels& s = simd::scalar_kernels();
  const Kernels* v = vector_kernels();
  if (!v) return;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> edge(-4000, 4000), step(-300, 300), bit(0, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 3000; ++trial) {
    simd::SpanSetup st{};
    st.e0 = edge(rng);
    st.e1 = edge(rng);
    st.e2 = edge(rng);
    st.dx0 = 16 * step(rng);
    st.dx1 = 16 * step(rng);
    st.dx2 = 16 * step(rng);
    st.bias0 = bit(rng);
    st.bias1 = bit(rng);
    st.bias2 = bit(rng);
    st.inv_area = 1.0 / (1 + 9000 * u(rng));
    st.z0 = u(rng) - 0.5;
    st.dz1 = u(rng) - 0.5;
    st.dz2 = u(rng) - 0.5;
    for (int c = 0; c < 3; ++c) {
      st.c0[c] = u(rng);
      st.dc1[c] = u(rng) - 0.5;
      st.dc2[c] = u(rng) - 0.5;
    }
    const std::size_t count = trial % 41;
    std::vector<double> za(count), zb;
    for (double& z : za) z = bit(rng) ? std::numeric_limits<double>::infinity() : u(rng) - 0.5;
    zb = za;
    std::vector<std::uint8_t> rgb_a(3 * count, 7), rgb_b = rgb_a, cov_a(count, 0), cov_b = cov_a;
    const std::size_t na = s.raster_span(st, count, za.data(), rgb_a.data(), cov_a.data());
    const std::size_t nb = v->raster_span(st, count, zb.data(), rgb_b.data(), cov_b.data());
    REQUIRE(na == nb);
    REQUIRE(std::memcmp(za.data(), zb.data(), count * sizeof(double)) == 0);
    REQUIRE(rgb_a == rgb_b);
    REQUIRE(cov_a == cov_b);
  }
}

TEST_CASE("full rasterization is identical across kernels") {
  const Kernels* v = vector_kernels();
  if (!v) return;
  const FaceModel& m = test::synthetic();
  const NmfcPalette pal = nmfc_palette(m);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 8; ++trial) {
    const Mesh mesh = synthesize_shape(m, {test::random_vector(rng, m.id_count)},
                                       {test::random_vector(rng, m.exp_count)});
    Pose pose;
    pose.rotation = test::random_rotation(rng, 30.0);
    pose.scale = 100.0;
    pose.translation = {128.0, 128.0};
    Points2 px;
    Eigen::VectorXd depth;
    project_with_depth(pose, mesh.vertices, px, depth);
    RasterSettings rs;
    rs.cull_backfaces = trial % 2 == 0;
    const NmfcImage a = rasterize(px, depth, pal, m.triangles, rs, &simd::scalar_kernels());
    const NmfcImage b = rasterize(px, depth, pal, m.triangles, rs, v);
    CHECK(a.pixels == b.pixels);
    CHECK(a.covered == b.covered);
    CHECK(std::memcmp(a.depth.data(), b.depth.data(), a.depth.size() * sizeof(double)) == 0);
  }
}

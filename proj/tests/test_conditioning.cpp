#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>

#include "reenact/conditioning.hpp"
#include "reenact/error.hpp"
#include "raster_oracle.hpp"
#include "support.hpp"

using namespace reenact;
using test::at;
using test::brute_force;

namespace {

ErrorCode error_code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected reenact::Error");
  return ErrorCode::InvalidArgument;
}

RasterSettings sized(int w, int h) {
  RasterSettings rs;
  rs.width = w;
  rs.height = h;
  return rs;
}

void check_same(const NmfcImage& a, const NmfcImage& b) {
  CHECK(a.pixels == b.pixels);
  CHECK(a.covered == b.covered);
  bool depth_equal = true;
  for (std::size_t i = 0; i < a.depth.size(); ++i) depth_equal = depth_equal && (a.depth[i] == b.depth[i]);
  CHECK(depth_equal);
}

TrackedFrame neutral_frame(const FaceModel& m, double scale = 115.2, Eigen::Vector2d t = {128, 128}) {
  TrackedFrame f;
  f.model_name = m.name;
  f.identity = IdentityParams::zero(m);
  f.expression = ExpressionParams::zero(m);
  f.pose.scale = scale;
  f.pose.translation = t;
  f.gaze.left.valid = f.gaze.right.valid = true;
  return f;
}

/// Even-odd parity at one pixel center.
bool inside_even_odd(const Points2& poly, double xc, double yc) {
  int left_crossings = 0;
  const auto n = poly.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double ax = poly(i, 0), ay = poly(i, 1), bx = poly((i + 1) % n, 0), by = poly((i + 1) % n, 1);
    if ((ay > yc) == (by > yc)) continue;
    const double xi = ax + (yc - ay) * (bx - ax) / (by - ay);
    if (xi <= xc) ++left_crossings;
  }
  return left_crossings % 2 == 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Rasterizer

TEST_CASE("constant-color triangle covering the image") {
  Points2 px(3, 2);
  px << -100, -100, -100, 1000, 1000, -100;
  const Eigen::VectorXd depth = Eigen::VectorXd::Zero(3);
  NmfcPalette pal;
  pal.colors = Eigen::MatrixXd::Constant(3, 3, 0.5);
  RasterSettings rs;
  const NmfcImage img = rasterize(px, depth, pal, {{0, 1, 2}}, rs);
  for (std::size_t i = 0; i < img.covered.size(); ++i) {
    REQUIRE(img.covered[i] == 1);
    REQUIRE(img.pixels.rgb[3 * i] == 128);
    REQUIRE(img.pixels.rgb[3 * i + 1] == 128);
    REQUIRE(img.pixels.rgb[3 * i + 2] == 128);
  }

  SUBCASE("the same triangle wound clockwise is culled") {
    const NmfcImage back = rasterize(px, depth, pal, {{0, 2, 1}}, rs);
    for (std::uint8_t c : back.covered) REQUIRE(c == 0);
    rs.cull_backfaces = false;
    const NmfcImage both = rasterize(px, depth, pal, {{0, 2, 1}}, rs);
    for (std::uint8_t c : both.covered) REQUIRE(c == 1);
  }
}

TEST_CASE("nearer triangle wins the overlap") {
  Points2 px(6, 2);
  px << 10, 10, 10, 50, 50, 10,  //
      20, 20, 20, 60, 60, 20;
  Eigen::VectorXd depth(6);
  depth << 1, 1, 1, -1, -1, -1;
  NmfcPalette pal;
  pal.colors.resize(6, 3);
  pal.colors.topRows(3).rowwise() = Eigen::RowVector3d(0, 1, 0);
  pal.colors.bottomRows(3).rowwise() = Eigen::RowVector3d(1, 0, 0);
  RasterSettings rs = sized(64, 64);
  for (const auto& order : {std::vector<Triangle>{{0, 1, 2}, {3, 4, 5}}, std::vector<Triangle>{{3, 4, 5}, {0, 1, 2}}}) {
    const NmfcImage img = rasterize(px, depth, pal, order, rs);
    CHECK(img.pixels.at(25, 25) == Rgb8{255, 0, 0});
    CHECK(img.pixels.at(12, 12) == Rgb8{0, 255, 0});
    CHECK(img.pixels.at(40, 40) == Rgb8{0, 0, 0});
    CHECK(img.depth[at(img.pixels, 25, 25)] == -1.0);
  }
}

TEST_CASE("equal depth keeps the earlier triangle") {
  Points2 px(3, 2);
  px << 0, 0, 0, 64, 64, 0;
  NmfcPalette red, green;
  red.colors = Eigen::MatrixXd::Zero(3, 3);
  red.colors.col(0).setOnes();
  const NmfcImage img = rasterize(px, Eigen::VectorXd::Zero(3), red, {{0, 1, 2}, {0, 1, 2}}, sized(16, 16));
  CHECK(img.pixels.at(2, 2) == Rgb8{255, 0, 0});
}

TEST_CASE("rasterizer equals the brute-force oracle") {
  std::uniform_real_distribution<double> coord(-12.0, 76.0), unit(0.0, 1.0);
  for (int seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const int v = 4 + seed % 9;
    Points2 px(v, 2);
    Eigen::VectorXd depth(v);
    NmfcPalette pal;
    pal.colors.resize(v, 3);
    for (int i = 0; i < v; ++i) {
      px(i, 0) = coord(rng);
      px(i, 1) = coord(rng);
      if (seed % 4 == 0) px.row(i) = (px.row(i) * 2.0).array().round() / 2.0;  // edges through pixel centers
      depth[i] = unit(rng) - 0.5;
      for (int c = 0; c < 3; ++c) pal.colors(i, c) = unit(rng);
    }
    if (seed % 10 == 0) pal.colors.setConstant(0.5);
    std::uniform_int_distribution<std::uint32_t> pick(0, v - 1);
    std::vector<Triangle> tris(3 + seed % 12);
    for (auto& t : tris) t = {pick(rng), pick(rng), pick(rng)};
    RasterSettings rs{64, 64, {3, 4, 5}, seed % 3 != 0};
    const NmfcImage got = rasterize(px, depth, pal, tris, rs, &simd::scalar_kernels());
    const NmfcImage want = brute_force(px, depth, pal, tris, rs);
    CAPTURE(seed);
    check_same(got, want);
    if (const simd::Kernels* avx = simd::avx2_kernels()) check_same(rasterize(px, depth, pal, tris, rs, avx), want);
  }
}

TEST_CASE("shared edges are drawn exactly once") {
  // A fan of triangles around a center: every covered pixel belongs to one triangle.
  const int n = 13;
  Points2 px(n + 1, 2);
  px.row(0) << 31.5, 31.5;
  for (int i = 0; i < n; ++i) {
    const double a = -2.0 * std::numbers::pi * i / n;
    px.row(i + 1) << 31.5 + 25.0 * std::cos(a), 31.5 + 25.0 * std::sin(a);
  }
  std::vector<Triangle> tris;
  for (int i = 0; i < n; ++i) tris.push_back({0, static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>((i + 1) % n + 1)});
  NmfcPalette pal;
  pal.colors = Eigen::MatrixXd::Zero(n + 1, 3);
  const RasterSettings rs = sized(64, 64);
  std::vector<int> hits(64 * 64, 0);
  for (const Triangle& t : tris) {
    const NmfcImage one = rasterize(px, Eigen::VectorXd::Zero(n + 1), pal, {t}, rs);
    for (std::size_t i = 0; i < hits.size(); ++i) hits[i] += one.covered[i];
  }
  int covered = 0;
  for (int h : hits) {
    CHECK(h <= 1);
    covered += h;
  }
  CHECK(covered > 1500);
}

TEST_CASE("triangles beyond the coordinate limit are skipped") {
  Points2 px(3, 2);
  px << 0, 0, 0, 70000, 70000, 0;
  NmfcPalette pal;
  pal.colors = Eigen::MatrixXd::Ones(3, 3);
  const NmfcImage img = rasterize(px, Eigen::VectorXd::Zero(3), pal, {{0, 1, 2}}, sized(16, 16));
  for (std::uint8_t c : img.covered) CHECK(c == 0);
  px(0, 0) = std::nan("");
  CHECK_NOTHROW(rasterize(px, Eigen::VectorXd::Zero(3), pal, {{0, 1, 2}}, sized(16, 16)));
}

TEST_CASE("rasterizer argument errors") {
  Points2 px = Points2::Zero(3, 2);
  NmfcPalette pal;
  pal.colors = Eigen::MatrixXd::Zero(3, 3);
  CHECK(error_code_of([&] { rasterize(px, Eigen::VectorXd::Zero(2), pal, {}, RasterSettings{}); }) ==
        ErrorCode::LengthMismatch);
  CHECK(error_code_of([&] { rasterize(px, Eigen::VectorXd::Zero(3), pal, {{0, 1, 3}}, RasterSettings{}); }) ==
        ErrorCode::IndexOutOfRange);
  CHECK(error_code_of([&] { rasterize(px, Eigen::VectorXd::Zero(3), pal, {}, sized(15, 64)); }) ==
        ErrorCode::InvalidArgument);
}

// ---------------------------------------------------------------------------
// NMFC

TEST_CASE("NMFC colors follow vertices, not poses") {
  const FaceModel& m = test::synthetic();
  const NmfcPalette pal = nmfc_palette(m);
  std::mt19937_64 rng(5);
  const IdentityParams a{test::random_vector(rng, m.id_count)};
  const ExpressionParams b{test::random_vector(rng, m.exp_count)};
  const Mesh mesh = synthesize_shape(m, a, b);

  SUBCASE("integer translation shifts the image exactly") {
    TrackedFrame f = neutral_frame(m, 90.0, {100.0, 110.0});
    f.identity = a;
    f.expression = b;
    f.pose.rotation = test::random_rotation(rng, 25.0);
    TrackedFrame g = f;
    g.pose.translation += Eigen::Vector2d(7.0, -5.0);
    const NmfcImage i1 = render_nmfc(m, f, RasterSettings{});
    const NmfcImage i2 = render_nmfc(m, g, RasterSettings{});
    int compared = 0;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) {
        const int x2 = x + 7, y2 = y - 5;
        if (x2 < 0 || x2 >= 256 || y2 < 0 || y2 >= 256) continue;
        REQUIRE(i1.pixels.at(x, y) == i2.pixels.at(x2, y2));
        compared += i1.covered[at(i1.pixels, x, y)];
      }
    CHECK(compared > 5000);
  }

  SUBCASE("a visible vertex placed on a pixel center shows its own color in every pose") {
    std::uniform_int_distribution<int> pick(0, m.vertex_count() - 1);
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 60; ++trial) {
      const int v = pick(rng);
      std::optional<Rgb8> first;
      bool visible_in_all = true;
      for (int k = 0; k < 3 && visible_in_all; ++k) {
        TrackedFrame f = neutral_frame(m);
        f.identity = a;
        f.expression = b;
        f.pose.rotation = test::random_rotation(rng, 20.0);
        // Move v onto the center of pixel (128, 128).
        const Eigen::Vector3d p = f.pose.rotation * mesh.vertices.row(v).transpose();
        f.pose.translation = Eigen::Vector2d(128.5, 128.5) - f.pose.scale * p.head<2>();
        const NmfcImage img = render_nmfc(m, f, RasterSettings{});
        const std::size_t i = at(img.pixels, 128, 128);
        if (!img.covered[i] || std::abs(img.depth[i] - p.z()) > 1e-9) {
          visible_in_all = false;
          break;
        }
        const Rgb8 c = img.pixels.at(128, 128);
        const Rgb8 own{simd::quantize_channel(pal.colors(v, 0)), simd::quantize_channel(pal.colors(v, 1)),
                       simd::quantize_channel(pal.colors(v, 2))};
        CHECK(c == own);
        if (first) CHECK(c == *first);
        first = c;
      }
      if (visible_in_all) ++checked;
    }
    CHECK(checked >= 30);
  }
}

TEST_CASE("neutral frame matches the golden image") {
  const FaceModel& m = test::synthetic();
  const TrackedFrame f = neutral_frame(m);
  const NmfcImage img = render_nmfc(m, f, RasterSettings{});
  const ProjectedFace face = project_face(m, f);

  // Oracle-check before trusting or writing the golden file.
  check_same(img, brute_force(face.pixels, face.depth, nmfc_palette(m), m.triangles, RasterSettings{}));

  const std::filesystem::path golden = std::filesystem::path(REENACT_TEST_DATA) / "golden_nmfc_neutral.png";
  if (std::getenv("REENACT_WRITE_GOLDEN")) {
    write_png(golden, img.pixels);
    MESSAGE("wrote " << golden);
  }
  REQUIRE(std::filesystem::exists(golden));
  CHECK(read_png(golden) == img.pixels);
}

TEST_CASE("minimum raster size") {
  const FaceModel& m = test::synthetic();
  const RasterSettings rs{16, 16, {9, 9, 9}, true};
  const NmfcImage img = render_nmfc(m, neutral_frame(m, 7.0, {8.0, 8.0}), rs);
  int covered = 0;
  for (std::size_t i = 0; i < img.covered.size(); ++i) {
    CHECK((img.covered[i] == 1) == std::isfinite(img.depth[i]));
    if (!img.covered[i]) CHECK(img.pixels.at(i % 16, i / 16) == Rgb8{9, 9, 9});
    covered += img.covered[i];
  }
  CHECK(covered > 50);
}

TEST_CASE("uncovered pixels keep the background") {
  const FaceModel& m = test::synthetic();
  RasterSettings rs;
  rs.background = {10, 20, 30};
  const NmfcImage img = render_nmfc(m, neutral_frame(m), rs);
  int background = 0;
  for (std::size_t i = 0; i < img.covered.size(); ++i)
    if (!img.covered[i]) {
      CHECK(img.pixels.at(i % 256, i / 256) == rs.background);
      ++background;
    }
  CHECK(background > 1000);
}

TEST_CASE("render rejects frames from another model") {
  const FaceModel& m = test::synthetic();
  TrackedFrame f = neutral_frame(m);
  f.model_name = "other";
  CHECK(error_code_of([&] { render_nmfc(m, f, RasterSettings{}); }) == ErrorCode::ModelMismatch);
}

// ---------------------------------------------------------------------------
// Gaze map

TEST_CASE("gaze map pupils") {
  Points2 left(6, 2), right(6, 2);
  left << 80, 100, 90, 94, 110, 94, 120, 100, 110, 106, 90, 106;
  right = left;
  right.col(0).array() += 60.0;
  const RasterSettings rs;

  auto green_centroid = [&](const GazeMap& g, int x0, int x1) {
    double sx = 0, sy = 0, n = 0;
    for (int y = 0; y < rs.height; ++y)
      for (int x = x0; x < x1; ++x)
        if (g.pixels.at(x, y).g == 255) {
          sx += x + 0.5;
          sy += y + 0.5;
          ++n;
        }
    return Eigen::Vector3d(sx / n, sy / n, n);
  };

  GazeState gaze;
  gaze.left.valid = gaze.right.valid = true;
  const GazeMap centered = render_gaze_map(gaze, left, right, rs);
  const Eigen::Vector3d lc = green_centroid(centered, 0, 130), rc = green_centroid(centered, 130, 256);
  CHECK((lc.head<2>() - Eigen::Vector2d(100, 100)).norm() <= 0.5);
  CHECK((rc.head<2>() - Eigen::Vector2d(160, 100)).norm() <= 0.5);
  // Radius 0.15 * 40 = 6 px: the disc holds about pi * 36 pixels.
  CHECK(std::abs(lc.z() - std::numbers::pi * 36.0) <= 12.0);

  gaze.left.offset = {1.0, 0.0};
  const GazeMap shifted = render_gaze_map(gaze, left, right, rs);
  const Eigen::Vector3d ls = green_centroid(shifted, 0, 130);
  CHECK((ls.head<2>() - Eigen::Vector2d(120, 100)).norm() <= 0.5);

  gaze.right.valid = false;
  const GazeMap one = render_gaze_map(gaze, left, right, rs);
  for (int y = 0; y < rs.height; ++y)
    for (int x = 0; x < rs.width; ++x) {
      CHECK(one.pixels.at(x, y).b == 0);
      if (x >= 130) CHECK(one.pixels.at(x, y).g == 0);
    }

  CHECK(error_code_of([&] { render_gaze_map(gaze, left.topRows(2), right, rs); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("eyelid fill equals the even-odd oracle") {
  std::uniform_real_distribution<double> coord(-6.0, 70.0);
  const RasterSettings rs = sized(64, 64);
  for (int seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed);
    const int nl = 3 + seed % 7, nr = 3 + (seed / 7) % 6;
    Points2 left(nl, 2), right(nr, 2);
    for (int i = 0; i < nl; ++i) left.row(i) << coord(rng), coord(rng);
    for (int i = 0; i < nr; ++i) right.row(i) << coord(rng), coord(rng);
    if (seed % 5 == 0) left = left.array().round();  // vertices on pixel boundaries
    if (seed % 6 == 0) right = (right.array() - 0.5).round() + 0.5;  // vertices on pixel centers
    GazeState gaze;
    gaze.left.valid = gaze.right.valid = true;
    const GazeMap g = render_gaze_map(gaze, left, right, rs);
    CAPTURE(seed);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        const Rgb8 c = g.pixels.at(x, y);
        REQUIRE((c.r == 255) == inside_even_odd(left, x + 0.5, y + 0.5));
        REQUIRE((c.b == 255) == inside_even_odd(right, x + 0.5, y + 0.5));
        REQUIRE((c.r == 0 || c.r == 255));
        REQUIRE((c.b == 0 || c.b == 255));
      }
  }
}

TEST_CASE("gaze map channel discipline on tracked faces") {
  const FaceModel& m = test::synthetic();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    TrackedFrame f = neutral_frame(m);
    f.identity.alpha = test::random_vector(rng, m.id_count);
    f.pose.rotation = test::random_rotation(rng, 20.0);
    f.gaze.left.offset = {u(rng), u(rng)};
    f.gaze.right.offset = {u(rng), u(rng)};
    const ProjectedFace face = project_face(m, f);
    const GazeMap g = render_gaze_map(m, f, face, RasterSettings{});

    std::array<Eigen::Vector4d, 2> boxes;  // x0, y0, x1, y1 expanded by the pupil radius
    const std::vector<std::uint32_t>* contours[2] = {&m.eye_meta.left_contour, &m.eye_meta.right_contour};
    for (int e = 0; e < 2; ++e) {
      Eigen::Vector2d lo(INFINITY, INFINITY), hi = -lo;
      for (std::uint32_t v : *contours[e]) {
        lo = lo.cwiseMin(face.pixels.row(v).transpose());
        hi = hi.cwiseMax(face.pixels.row(v).transpose());
      }
      const double r = 0.15 * (hi.x() - lo.x()) + 1.0;
      boxes[e] << lo.x() - r, lo.y() - r, hi.x() + r, hi.y() + r;
    }
    const bool boxes_overlap = boxes[0][0] < boxes[1][2] && boxes[1][0] < boxes[0][2] &&
                               boxes[0][1] < boxes[1][3] && boxes[1][1] < boxes[0][3];
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) {
        const Rgb8 c = g.pixels.at(x, y);
        if (!boxes_overlap) REQUIRE_FALSE((c.r && c.b));
        if (c.g) {
          bool in_some = false;
          for (const auto& b : boxes) in_some = in_some || (x + 0.5 >= b[0] && x + 0.5 <= b[2] && y + 0.5 >= b[1] && y + 0.5 <= b[3]);
          REQUIRE(in_some);
        }
      }
  }
}

// ---------------------------------------------------------------------------
// Mouth ROI

TEST_CASE("mouth ROI") {
  const FaceModel& m = test::synthetic();
  const RasterSettings rs;

  auto mouth_points = [&](const ProjectedFace& face) {
    Points2 pts(20, 2);
    for (int i = 0; i < 20; ++i) pts.row(i) = face.pixels.row(m.landmark_map[48 + i]);
    return pts;
  };

  SUBCASE("frontal face contains every mouth landmark") {
    const TrackedFrame f = neutral_frame(m);
    const Rect r = mouth_roi(m, f, rs);
    const Points2 pts = mouth_points(project_face(m, f));
    CHECK(r.w == r.h);
    CHECK(r.w > 10);
    for (int i = 0; i < 20; ++i) {
      CHECK(pts(i, 0) >= r.x);
      CHECK(pts(i, 0) < r.x + r.w);
      CHECK(pts(i, 1) >= r.y);
      CHECK(pts(i, 1) < r.y + r.h);
    }
  }

  SUBCASE("30 degree yaw matches an independent computation") {
    TrackedFrame f = neutral_frame(m);
    f.pose.rotation = Eigen::AngleAxisd(std::numbers::pi / 6, Eigen::Vector3d::UnitY());
    const Points2 pts = mouth_points(project_face(m, f));
    const double bx0 = pts.col(0).minCoeff(), bx1 = pts.col(0).maxCoeff();
    const double by0 = pts.col(1).minCoeff(), by1 = pts.col(1).maxCoeff();
    const double ex = 0.2 * (bx1 - bx0), ey = 0.2 * (by1 - by0);
    const double w = bx1 - bx0 + 2 * ex, h = by1 - by0 + 2 * ey, side = std::max(w, h);
    const double cx = (bx0 + bx1) / 2, cy = (by0 + by1) / 2;
    const int x0 = static_cast<int>(std::floor(cx - side / 2)), y0 = static_cast<int>(std::floor(cy - side / 2));
    const int n = static_cast<int>(std::max(std::ceil(cx + side / 2) - x0, std::ceil(cy + side / 2) - y0));
    CHECK(mouth_roi(m, f, rs) == Rect{x0, y0, n, n});
  }

  SUBCASE("head at the image edge is clipped") {
    for (const Eigen::Vector2d& t : {Eigen::Vector2d(0, 0), Eigen::Vector2d(256, 256), Eigen::Vector2d(-20, 128),
                                    Eigen::Vector2d(250, 60)}) {
      const Rect r = mouth_roi(m, neutral_frame(m, 115.2, t), rs);
      CHECK(r.x >= 0);
      CHECK(r.y >= 0);
      CHECK(r.w >= 0);
      CHECK(r.h >= 0);
      CHECK(r.x + r.w <= 256);
      CHECK(r.y + r.h <= 256);
    }
    const Rect corner = mouth_roi(m, neutral_frame(m, 115.2, {256, 0}), rs);
    CHECK(corner.w != corner.h);
  }
}

// ---------------------------------------------------------------------------
// PNG and export

TEST_CASE("PNG round-trip") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> byte(0, 255);
  Image img(37, 16);
  for (auto& b : img.rgb) b = static_cast<std::uint8_t>(byte(rng));
  const auto bytes = encode_png(img);
  CHECK(decode_png(bytes) == img);
  CHECK(encode_png(img) == bytes);
  CHECK(error_code_of([] { decode_png({1, 2, 3, 4}); }) == ErrorCode::BadFormat);
  test::TempDir dir("png");
  write_png(dir / "a.png", img);
  CHECK(read_png(dir / "a.png") == img);
  CHECK(error_code_of([&] { read_png(dir / "missing.png"); }) == ErrorCode::Io);
}

TEST_CASE("export_sequence") {
  const FaceModel& m = test::synthetic();
  const NmfcPalette pal = nmfc_palette(m);
  std::vector<ConditioningFrame> frames;
  for (int i = 0; i < 3; ++i) {
    TrackedFrame f = neutral_frame(m, 100.0 + i, {120.0 + i, 128.0});
    f.t = i / 25.0;
    frames.push_back(render_conditioning(m, f, pal, sized(64, 48)));
  }
  std::vector<ExportItem> items;
  for (const auto& f : frames) items.push_back({&f, std::nullopt});
  items[1].real = Image(64, 48, {1, 2, 3});

  test::TempDir dir("export");
  const Manifest man = export_sequence(dir / "a", items, 25.0, "target");
  CHECK(man.count == 3);
  CHECK(man.mouth_rois.size() == 3);
  CHECK(man.width == 64);
  CHECK(man.height == 48);
  for (const char* sub : {"nmfc", "gaze"}) {
    int n = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "a" / sub)) ++n;
    CHECK(n == 3);
  }
  CHECK(std::filesystem::exists(dir / "a" / "real" / "000001.png"));
  CHECK_FALSE(std::filesystem::exists(dir / "a" / "real" / "000000.png"));
  CHECK(read_png(dir / "a" / "nmfc" / "000002.png") == frames[2].nmfc.pixels);
  CHECK(read_png(dir / "a" / "gaze" / "000000.png") == frames[0].gaze.pixels);

  const Manifest back = Manifest::from_json(test::read_file(dir / "a" / "manifest.json"));
  CHECK(back.count == 3);
  CHECK(back.fps == 25.0);
  CHECK(back.profile_label == "target");
  CHECK(back.mouth_rois == man.mouth_rois);
  CHECK(back.mouth_rois[1] == frames[1].mouth_roi);

  export_sequence(dir / "b", items, 25.0, "target");
  for (const char* f : {"nmfc/000000.png", "nmfc/000002.png", "gaze/000001.png", "real/000001.png", "manifest.json"})
    CHECK(test::read_file(dir / "a" / f) == test::read_file(dir / "b" / f));

  std::ofstream(dir / "file") << "x";
  CHECK(error_code_of([&] { export_sequence(dir / "file" / "out", items, 25.0, "t"); }) == ErrorCode::Io);
  CHECK(error_code_of([] { Manifest::from_json("{\"count\": 1}"); }) == ErrorCode::BadFormat);
}

TEST_CASE("rendering is deterministic") {
  const FaceModel& m = test::synthetic();
  TrackedFrame f = neutral_frame(m);
  std::mt19937_64 rng(10);
  f.identity.alpha = test::random_vector(rng, m.id_count);
  f.expression.beta = test::random_vector(rng, m.exp_count);
  f.pose.rotation = test::random_rotation(rng);
  const NmfcPalette pal = nmfc_palette(m);
  const ConditioningFrame a = render_conditioning(m, f, pal, RasterSettings{});
  const ConditioningFrame b = render_conditioning(m, f, pal, RasterSettings{});
  CHECK(encode_png(a.nmfc.pixels) == encode_png(b.nmfc.pixels));
  CHECK(encode_png(a.gaze.pixels) == encode_png(b.gaze.pixels));
  CHECK(a.mouth_roi == b.mouth_roi);
}

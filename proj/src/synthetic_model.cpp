#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/QR>

#include "reenact/error.hpp"
#include "reenact/morphable_model.hpp"

namespace reenact {
namespace {

// Values live on a 2^-16 grid so sums of squares and centroids are exact in double.
constexpr double kGrid = 65536.0;

constexpr double kAxisX = 0.75, kAxisY = 1.0, kAxisZ = 0.85;
constexpr double kMaxAzimuth = 100.0 * std::numbers::pi / 180.0;
constexpr double kTopElevation = 65.0 * std::numbers::pi / 180.0;
constexpr double kBottomElevation = -60.0 * std::numbers::pi / 180.0;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() {
    const double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Nose, eye sockets, lips and chin on top of the ellipsoid; displacement along z.
double relief(double x, double y) {
  auto g = [](double dx, double dy, double sx, double sy) {
    return std::exp(-(dx * dx) / (2 * sx * sx) - (dy * dy) / (2 * sy * sy));
  };
  double dz = -0.28 * g(x, y + 0.02, 0.07, 0.16);  // nose
  dz += 0.05 * g(x + 0.27, y + 0.22, 0.09, 0.06);   // eye sockets
  dz += 0.05 * g(x - 0.27, y + 0.22, 0.09, 0.06);
  dz -= 0.04 * g(x, y - 0.38, 0.16, 0.07);          // lips
  dz -= 0.18 * g(x, y - 0.72, 0.22, 0.14);          // chin
  return dz;
}

Eigen::Vector3d surface_point(double azimuth, double elevation) {
  const double x = kAxisX * std::sin(azimuth) * std::cos(elevation);
  const double y = -kAxisY * std::sin(elevation);
  double z = -kAxisZ * std::cos(azimuth) * std::cos(elevation);
  if (z < 0.0) z += relief(x, y) * std::min(1.0, -z / (0.5 * kAxisZ));
  return {x, y, z};
}

/// Frontal surface point with the given image-plane position.
Eigen::Vector3d frontal_point(double x, double y) {
  const double r = 1.0 - (x / kAxisX) * (x / kAxisX) - (y / kAxisY) * (y / kAxisY);
  double z = -kAxisZ * std::sqrt(std::max(r, 0.0));
  if (z < 0.0) z += relief(x, y) * std::min(1.0, -z / (0.5 * kAxisZ));
  return {x, y, z};
}

/// iBUG-68 layout on the frontal face, x right / y down, in model units.
std::array<Eigen::Vector2d, kLandmarkCount> landmark_template() {
  using std::numbers::pi;
  std::array<Eigen::Vector2d, kLandmarkCount> p;
  for (int k = 0; k <= 16; ++k) {  // jaw
    const double a = pi * k / 16.0;
    p[k] = {-0.62 * std::cos(a), -0.05 + 0.80 * std::sin(a)};
  }
  for (int k = 0; k < 5; ++k) {  // brows
    const double y = -0.40 - 0.06 * std::sin(pi * k / 4.0);
    p[17 + k] = {-0.45 + 0.0875 * k, y};
    p[22 + k] = {0.10 + 0.0875 * k, -0.40 - 0.06 * std::sin(pi * (4 - k) / 4.0)};
  }
  for (int k = 0; k < 4; ++k) p[27 + k] = {0.0, -0.28 + 0.11 * k};  // nose bridge
  for (int k = 0; k < 5; ++k) p[31 + k] = {-0.12 + 0.06 * k, 0.12 + 0.03 * (1.0 - std::abs(k - 2) / 2.0)};
  auto eye = [&p](int first, double cx, double cy) {
    const double w = 0.24, h = 0.08;
    p[first + 0] = {cx - w / 2, cy};
    p[first + 1] = {cx - w / 6, cy - h / 2};
    p[first + 2] = {cx + w / 6, cy - h / 2};
    p[first + 3] = {cx + w / 2, cy};
    p[first + 4] = {cx + w / 6, cy + h / 2};
    p[first + 5] = {cx - w / 6, cy + h / 2};
  };
  eye(36, -0.27, -0.22);
  eye(42, 0.27, -0.22);
  for (int k = 0; k < 12; ++k) p[48 + k] = {-0.22 * std::cos(pi * k / 6.0), 0.38 - 0.09 * std::sin(pi * k / 6.0)};
  for (int k = 0; k < 8; ++k) p[60 + k] = {-0.14 * std::cos(pi * k / 4.0), 0.38 - 0.03 * std::sin(pi * k / 4.0)};
  return p;
}

std::vector<int> row_counts(int vertex_count) {
  const int rows = std::max(2, static_cast<int>(std::lround(std::sqrt(vertex_count / 1.6))));
  std::vector<int> counts(rows, vertex_count / rows);
  for (int i = 0; i < vertex_count % rows; ++i) ++counts[i];
  return counts;
}

/// Stitches two polylines of arbitrary lengths into a triangle strip.
void zipper(int a0, int na, int b0, int nb, std::vector<Triangle>& out) {
  int i = 0, j = 0;
  while (i < na - 1 || j < nb - 1) {
    bool advance_a;
    if (i == na - 1) advance_a = false;
    else if (j == nb - 1) advance_a = true;
    else advance_a = (i + 1) * static_cast<long long>(nb - 1) <= (j + 1) * static_cast<long long>(na - 1);
    if (advance_a) {
      out.push_back({static_cast<std::uint32_t>(a0 + i), static_cast<std::uint32_t>(a0 + i + 1),
                     static_cast<std::uint32_t>(b0 + j)});
      ++i;
    } else {
      out.push_back({static_cast<std::uint32_t>(a0 + i), static_cast<std::uint32_t>(b0 + j + 1),
                     static_cast<std::uint32_t>(b0 + j)});
      ++j;
    }
  }
}

std::uint32_t nearest_unused(const std::vector<Eigen::Vector3d>& verts, const Eigen::Vector3d& target,
                             std::vector<bool>& used) {
  std::size_t best = verts.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < verts.size(); ++i) {
    if (used[i]) continue;
    const double d = (verts[i] - target).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  used[best] = true;
  return static_cast<std::uint32_t>(best);
}

using Fields = Eigen::MatrixXd;  // 3V × K, flattened xyz per column

double gaussian(const Eigen::Vector3d& offset, double width) {
  return std::exp(-offset.squaredNorm() / (2 * width * width));
}

/// Expression: one localized bump per column around a random landmark, carrying
/// a local symmetric strain plus a small translation.
Fields expression_fields(const std::vector<Eigen::Vector3d>& verts,
                         const std::array<std::uint32_t, kLandmarkCount>& landmarks, int k, Rng& rng) {
  Fields f = Fields::Zero(3 * verts.size(), k);
  for (int c = 0; c < k; ++c) {
    const Eigen::Vector3d center = verts[landmarks[rng.next() % kLandmarkCount]];
    const double width = 0.10 + 0.08 * rng.uniform();
    Eigen::Matrix3d strain;
    for (int r = 0; r < 3; ++r)
      for (int q = r; q < 3; ++q) strain(r, q) = strain(q, r) = rng.normal();
    strain.row(2) *= 0.4;
    strain.col(2) *= 0.4;
    const Eigen::Vector3d dir(rng.normal(), rng.normal(), 0.4 * rng.normal());
    for (std::size_t i = 0; i < verts.size(); ++i) {
      const Eigen::Vector3d off = verts[i] - center;
      f.block<3, 1>(3 * i, c) = gaussian(off, width) * (strain * off / width + 0.3 * dir);
    }
  }
  return f;
}

/// Identity: broad mixtures of three bumps anywhere on the face.
Fields identity_fields(const std::vector<Eigen::Vector3d>& verts,
                       const std::array<std::uint32_t, kLandmarkCount>& landmarks, int k, Rng& rng) {
  Fields f = Fields::Zero(3 * verts.size(), k);
  for (int c = 0; c < k; ++c) {
    for (int b = 0; b < 3; ++b) {
      const Eigen::Vector3d center = verts[landmarks[rng.next() % kLandmarkCount]];
      const double width = 0.12 + 0.10 * rng.uniform();
      const Eigen::Vector3d dir(rng.normal(), rng.normal(), 0.6 * rng.normal());
      for (std::size_t i = 0; i < verts.size(); ++i)
        f.block<3, 1>(3 * i, c) += gaussian(verts[i] - center, width) * dir;
    }
  }
  return f;
}

/// Affine motions x -> A x + b of every vertex (12 columns).
Fields affine_fields(const std::vector<Eigen::Vector3d>& verts) {
  Fields f = Fields::Zero(3 * verts.size(), 12);
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (int a = 0; a < 3; ++a) {
      f(3 * i + a, 4 * a + 0) = verts[i].x();
      f(3 * i + a, 4 * a + 1) = verts[i].y();
      f(3 * i + a, 4 * a + 2) = verts[i].z();
      f(3 * i + a, 4 * a + 3) = 1.0;
    }
  return f;
}

Eigen::MatrixXd landmark_rows(const Fields& f, const std::array<std::uint32_t, kLandmarkCount>& landmarks) {
  Eigen::MatrixXd out(3 * kLandmarkCount, f.cols());
  for (int i = 0; i < kLandmarkCount; ++i) out.middleRows<3>(3 * i) = f.middleRows<3>(3 * landmarks[i]);
  return out;
}

/// Subtracts from `f` the combination of `against` that best explains its
/// landmark rows, leaving landmark footprints orthogonal to those of `against`.
void decouple(Fields& f, const Fields& against, const std::array<std::uint32_t, kLandmarkCount>& landmarks) {
  const Eigen::MatrixXd a = landmark_rows(against, landmarks);
  const Eigen::MatrixXd coeff = a.completeOrthogonalDecomposition().solve(landmark_rows(f, landmarks));
  f -= against * coeff;
}

void orthonormalize(Fields& f) {
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      for (Eigen::Index j = 0; j < c; ++j) f.col(c) -= f.col(j).dot(f.col(c)) * f.col(j);
      f.col(c).normalize();
    }
}

/// Rounds orthonormal columns to float32, nudging entries by single ulps until
/// the float Gram matrix matches the identity far below float resolution.
std::vector<float> quantize_orthonormal(const Fields& f, Rng& rng) {
  const Eigen::Index rows = f.rows(), k = f.cols();
  Eigen::MatrixXd q(rows, k);  // already quantized columns, as doubles
  std::vector<Eigen::Index> order(rows);
  for (Eigen::Index i = 0; i < rows; ++i) order[i] = i;

  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::VectorXd y = f.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < c; ++j) y -= q.col(j).dot(y) * q.col(j);
      y.normalize();
    }
    Eigen::VectorXd z(rows);
    for (Eigen::Index i = 0; i < rows; ++i) z[i] = static_cast<float>(y[i]);

    auto errors = [&] {
      Eigen::VectorXd e(c + 1);
      for (Eigen::Index j = 0; j < c; ++j) e[j] = q.col(j).dot(z);
      e[c] = z.squaredNorm() - 1.0;
      return e;
    };
    Eigen::VectorXd e = errors();
    for (int pass = 0; pass < 12 && e.cwiseAbs().maxCoeff() > 1e-14; ++pass) {
      for (Eigen::Index i = rows - 1; i > 0; --i) std::swap(order[i], order[rng.next() % (i + 1)]);
      double cost = e.squaredNorm();
      for (Eigen::Index i : order) {
        const float zi = static_cast<float>(z[i]);
        for (float toward : {INFINITY, -INFINITY}) {
          const double delta = static_cast<double>(std::nextafter(zi, toward)) - z[i];
          Eigen::VectorXd trial = e;
          for (Eigen::Index j = 0; j < c; ++j) trial[j] += delta * q(i, j);
          trial[c] += delta * (2.0 * z[i] + delta);
          const double trial_cost = trial.squaredNorm();
          if (trial_cost < cost) {
            z[i] += delta;
            e = trial;
            cost = trial_cost;
            break;
          }
        }
      }
      e = errors();
    }
    q.col(c) = z;
  }

  std::vector<float> out(rows * k);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < k; ++c) out[r * k + c] = static_cast<float>(q(r, c));
  return out;
}

}  // namespace

FaceModel make_synthetic_model(const SyntheticModelOptions& options) {
  if (options.vertex_count < kMinSyntheticVertices)
    throw Error(ErrorCode::TooFewVertices, "need at least " + std::to_string(kMinSyntheticVertices) +
                                               " vertices, got " + std::to_string(options.vertex_count));
  if (options.id_count < 1 || options.exp_count < 1)
    throw Error(ErrorCode::InvalidArgument, "basis sizes must be at least 1");
  if (options.id_count > options.vertex_count || options.exp_count > options.vertex_count)
    throw Error(ErrorCode::InvalidArgument, "more basis columns than vertices");

  Rng rng(options.seed);
  const int v = options.vertex_count;

  // Rows of vertices from forehead to chin, stitched pairwise.
  const std::vector<int> counts = row_counts(v);
  std::vector<Eigen::Vector3d> verts;
  verts.reserve(v);
  std::vector<int> row_start;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    row_start.push_back(static_cast<int>(verts.size()));
    const double elevation =
        kTopElevation + (kBottomElevation - kTopElevation) * static_cast<double>(r) / (counts.size() - 1);
    for (int c = 0; c < counts[r]; ++c) {
      const double u = counts[r] == 1 ? 0.5 : static_cast<double>(c) / (counts[r] - 1);
      verts.push_back(surface_point(-kMaxAzimuth + 2 * kMaxAzimuth * u, elevation));
    }
  }
  FaceModel model;
  model.name = "synthetic-" + std::to_string(options.seed);
  for (std::size_t r = 0; r + 1 < counts.size(); ++r)
    zipper(row_start[r], counts[r], row_start[r + 1], counts[r + 1], model.triangles);

  // Front faces wind counter-clockwise around the outward normal.
  for (Triangle& t : model.triangles) {
    const Eigen::Vector3d n = (verts[t[1]] - verts[t[0]]).cross(verts[t[2]] - verts[t[0]]);
    const Eigen::Vector3d centroid = (verts[t[0]] + verts[t[1]] + verts[t[2]]) / 3.0;
    const Eigen::Vector3d outward(centroid.x() / (kAxisX * kAxisX), centroid.y() / (kAxisY * kAxisY),
                                  centroid.z() / (kAxisZ * kAxisZ));
    if (n.dot(outward) < 0.0) std::swap(t[1], t[2]);
  }

  std::vector<bool> used(v, false);
  const auto templ = landmark_template();
  for (int i = 0; i < kLandmarkCount; ++i)
    model.landmark_map[i] = nearest_unused(verts, frontal_point(templ[i].x(), templ[i].y()), used);
  for (int i = 36; i < 42; ++i) model.eye_meta.left_contour.push_back(model.landmark_map[i]);
  for (int i = 42; i < 48; ++i) model.eye_meta.right_contour.push_back(model.landmark_map[i]);
  model.eye_meta.left_pupil = nearest_unused(verts, frontal_point(-0.27, -0.22), used);
  model.eye_meta.right_pupil = nearest_unused(verts, frontal_point(0.27, -0.22), used);

  // Quantize and center the mean shape exactly.
  std::vector<std::int64_t> grid(3 * v);
  for (int i = 0; i < v; ++i)
    for (int a = 0; a < 3; ++a) grid[3 * i + a] = std::llround(verts[i][a] * kGrid);
  for (int a = 0; a < 3; ++a) {
    std::int64_t sum = 0;
    for (int i = 0; i < v; ++i) sum += grid[3 * i + a];
    std::int64_t base = sum / v;
    if (sum % v != 0 && sum < 0) --base;
    const std::int64_t rem = sum - base * v;
    for (int i = 0; i < v; ++i) grid[3 * i + a] -= base + (i < rem ? 1 : 0);
  }
  model.mean.resize(3 * v);
  for (int i = 0; i < 3 * v; ++i) model.mean[i] = static_cast<float>(static_cast<double>(grid[i]) / kGrid);
  for (int i = 0; i < v; ++i) verts[i] = model.mean_vertex(i);

  model.id_count = options.id_count;
  model.exp_count = options.exp_count;
  // Landmark footprints: expression orthogonal to affine motion (so it cannot
  // imitate pose), identity orthogonal to both.
  const Fields affine = affine_fields(verts);
  Fields exp_fields = expression_fields(verts, model.landmark_map, options.exp_count, rng);
  decouple(exp_fields, affine, model.landmark_map);
  orthonormalize(exp_fields);
  Fields id_fields = identity_fields(verts, model.landmark_map, options.id_count, rng);
  Fields nuisance(affine.rows(), affine.cols() + exp_fields.cols());
  nuisance << affine, exp_fields;
  decouple(id_fields, nuisance, model.landmark_map);
  orthonormalize(id_fields);
  model.id_basis = quantize_orthonormal(id_fields, rng);
  model.exp_basis = quantize_orthonormal(exp_fields, rng);

  model.validate();
  return model;
}

}  // namespace reenact

#include "reenact/morphable_model.hpp"

#include <cmath>
#include <set>

#include "reenact/error.hpp"
#include "reenact/simd/kernels.hpp"

namespace reenact {

void FaceModel::validate() const {
  if (mean.empty() || mean.size() % 3 != 0) throw Error(ErrorCode::BadFormat, "mean shape must hold 3V values");
  const std::size_t v = mean.size() / 3;
  if (id_count < 1 || exp_count < 1) throw Error(ErrorCode::BadFormat, "bases need at least one column");
  if (id_basis.size() != 3 * v * static_cast<std::size_t>(id_count))
    throw Error(ErrorCode::BlobSizeMismatch, "identity basis is not 3V x K_id");
  if (exp_basis.size() != 3 * v * static_cast<std::size_t>(exp_count))
    throw Error(ErrorCode::BlobSizeMismatch, "expression basis is not 3V x K_exp");

  for (const Triangle& t : triangles)
    for (std::uint32_t i : t)
      if (i >= v) throw Error(ErrorCode::IndexOutOfRange, "triangle index " + std::to_string(i));

  std::set<std::uint32_t> seen;
  for (std::uint32_t i : landmark_map) {
    if (i >= v) throw Error(ErrorCode::IndexOutOfRange, "landmark index " + std::to_string(i));
    if (!seen.insert(i).second) throw Error(ErrorCode::BadFormat, "duplicate landmark vertex " + std::to_string(i));
  }

  auto check_eye = [v](std::uint32_t i) {
    if (i >= v) throw Error(ErrorCode::IndexOutOfRange, "eye vertex " + std::to_string(i));
  };
  for (std::uint32_t i : eye_meta.left_contour) check_eye(i);
  for (std::uint32_t i : eye_meta.right_contour) check_eye(i);
  check_eye(eye_meta.left_pupil);
  check_eye(eye_meta.right_pupil);

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(INFINITY), hi = -lo, sum = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < v; ++i) {
    const Eigen::Vector3d p = mean_vertex(i);
    if (!p.allFinite()) throw Error(ErrorCode::BadFormat, "non-finite mean shape");
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
    sum += p;
  }
  const double diagonal = (hi - lo).norm();
  if ((sum / static_cast<double>(v)).norm() > 1e-9 * diagonal)
    throw Error(ErrorCode::BadFormat, "mean shape is not centered");
}

bool Pose::is_valid() const {
  return std::abs(rotation.norm() - 1.0) <= 1e-9 && std::isfinite(scale) && scale > 0.0 && translation.allFinite();
}

Mesh synthesize_shape(const FaceModel& model, const IdentityParams& id, const ExpressionParams& exp) {
  if (id.alpha.size() != model.id_count || exp.beta.size() != model.exp_count)
    throw Error(ErrorCode::LengthMismatch, "parameter lengths do not match the model bases");
  const std::size_t rows = model.mean.size();
  Mesh mesh;
  mesh.vertices.resize(model.vertex_count(), 3);
  double* out = mesh.vertices.data();
  for (std::size_t r = 0; r < rows; ++r) out[r] = model.mean[r];
  const auto& k = simd::active_kernels();
  k.basis_gemv(model.id_basis.data(), rows, model.id_count, id.alpha.data(), out);
  k.basis_gemv(model.exp_basis.data(), rows, model.exp_count, exp.beta.data(), out);
  return mesh;
}

namespace {

Eigen::Matrix<double, 3, 3, Eigen::RowMajor> rotation_matrix(const Pose& pose) {
  return pose.rotation.toRotationMatrix();
}

}  // namespace

void project_with_depth(const Pose& pose, const Points3& points, Points2& pixels, Eigen::VectorXd& depth) {
  const auto rot = rotation_matrix(pose);
  pixels.resize(points.rows(), 2);
  depth.resize(points.rows());
  simd::active_kernels().project_points(points.data(), points.rows(), rot.data(), pose.scale,
                                        pose.translation.x(), pose.translation.y(), pixels.data(), depth.data());
}

Points2 project(const Pose& pose, const Points3& points) {
  Points2 pixels;
  Eigen::VectorXd depth;
  project_with_depth(pose, points, pixels, depth);
  return pixels;
}

NmfcPalette nmfc_palette(const FaceModel& model) {
  const int v = model.vertex_count();
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(INFINITY), hi = -lo;
  for (int i = 0; i < v; ++i) {
    lo = lo.cwiseMin(model.mean_vertex(i));
    hi = hi.cwiseMax(model.mean_vertex(i));
  }
  NmfcPalette palette;
  palette.colors.resize(v, 3);
  for (int i = 0; i < v; ++i) {
    const Eigen::Vector3d p = model.mean_vertex(i);
    for (int a = 0; a < 3; ++a) {
      const double extent = hi[a] - lo[a];
      palette.colors(i, a) = extent > 0.0 ? (p[a] - lo[a]) / extent : 0.5;
    }
  }
  return palette;
}

Points3 landmark_positions(const FaceModel& model, const Mesh& mesh) {
  Points3 out(kLandmarkCount, 3);
  for (int i = 0; i < kLandmarkCount; ++i) out.row(i) = mesh.vertices.row(model.landmark_map[i]);
  return out;
}

Points3 landmark_positions(const FaceModel& model, const IdentityParams& id, const ExpressionParams& exp) {
  if (id.alpha.size() != model.id_count || exp.beta.size() != model.exp_count)
    throw Error(ErrorCode::LengthMismatch, "parameter lengths do not match the model bases");
  Points3 out(kLandmarkCount, 3);
  const auto& k = simd::active_kernels();
  for (int i = 0; i < kLandmarkCount; ++i) {
    const std::uint32_t v = model.landmark_map[i];
    double* row = out.row(i).data();
    for (int a = 0; a < 3; ++a) row[a] = model.mean[3 * v + a];
    k.basis_gemv(model.id_basis.data() + 3 * v * model.id_count, 3, model.id_count, id.alpha.data(), row);
    k.basis_gemv(model.exp_basis.data() + 3 * v * model.exp_count, 3, model.exp_count, exp.beta.data(), row);
  }
  return out;
}

}  // namespace reenact

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace reenact {

inline constexpr int kLandmarkCount = 68;

/// N×3 / N×2 point sets, row-major so each point is contiguous.
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using Triangle = std::array<std::uint32_t, 3>;

struct EyeMeta {
  std::vector<std::uint32_t> left_contour;
  std::vector<std::uint32_t> right_contour;
  std::uint32_t left_pupil = 0;
  std::uint32_t right_pupil = 0;

  bool operator==(const EyeMeta&) const = default;
};

/// Linear face model: mean shape plus identity and expression bases.
///
/// Coordinates follow the camera convention used throughout the project:
/// x to the right, y down, z away from the viewer. A frontal face therefore
/// looks towards -z and nearer surface points have smaller z.
///
/// Bases are stored row-major over the flattened 3V coordinate vector
/// (x0, y0, z0, x1, ...), one column per coefficient, exactly as on disk.
struct FaceModel {
  std::string name;
  std::vector<float> mean;       // 3V
  std::vector<float> id_basis;   // 3V × K_id
  std::vector<float> exp_basis;  // 3V × K_exp
  std::vector<Triangle> triangles;
  std::array<std::uint32_t, kLandmarkCount> landmark_map{};
  EyeMeta eye_meta;
  int id_count = 0;
  int exp_count = 0;

  int vertex_count() const { return static_cast<int>(mean.size() / 3); }

  /// Throws Error if any FaceModel invariant is violated.
  void validate() const;

  Eigen::Vector3d mean_vertex(std::size_t v) const {
    return {mean[3 * v], mean[3 * v + 1], mean[3 * v + 2]};
  }

  /// 3×K slice of a basis belonging to one vertex.
  Eigen::Map<const Eigen::Matrix<float, 3, Eigen::Dynamic, Eigen::RowMajor>> id_block(std::size_t v) const {
    return {id_basis.data() + 3 * v * id_count, 3, id_count};
  }
  Eigen::Map<const Eigen::Matrix<float, 3, Eigen::Dynamic, Eigen::RowMajor>> exp_block(std::size_t v) const {
    return {exp_basis.data() + 3 * v * exp_count, 3, exp_count};
  }

  bool operator==(const FaceModel&) const = default;
};

struct IdentityParams {
  Eigen::VectorXd alpha;

  static IdentityParams zero(const FaceModel& m) { return {Eigen::VectorXd::Zero(m.id_count)}; }
};

struct ExpressionParams {
  Eigen::VectorXd beta;

  static ExpressionParams zero(const FaceModel& m) { return {Eigen::VectorXd::Zero(m.exp_count)}; }
};

/// Weak-perspective camera: rotate, drop z, scale, translate.
struct Pose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // world -> camera
  double scale = 1.0;                                             // pixels per model unit
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();          // pixels

  bool is_valid() const;
};

struct Mesh {
  Points3 vertices;
};

struct NmfcPalette {
  Points3 colors;  // V×3, every channel in [0,1]
};

/// vertices = mean + id_basis·alpha + exp_basis·beta.
Mesh synthesize_shape(const FaceModel& model, const IdentityParams& id, const ExpressionParams& exp);

/// Weak-perspective projection of model-space points to pixels.
Points2 project(const Pose& pose, const Points3& points);

/// Projection plus the rotated z of every point (camera-space depth, smaller is nearer).
void project_with_depth(const Pose& pose, const Points3& points, Points2& pixels, Eigen::VectorXd& depth);

/// Per-vertex color from the normalized mean-shape bounding box. Independent of
/// any identity, expression or pose.
NmfcPalette nmfc_palette(const FaceModel& model);

/// Rows of mesh at landmark_map, in landmark order.
Points3 landmark_positions(const FaceModel& model, const Mesh& mesh);

/// Same gather, but synthesizes only the 68 landmark vertices.
Points3 landmark_positions(const FaceModel& model, const IdentityParams& id, const ExpressionParams& exp);

FaceModel load_model(const std::filesystem::path& dir);
void save_model(const FaceModel& model, const std::filesystem::path& dir);

struct SyntheticModelOptions {
  std::uint64_t seed = 7;
  int vertex_count = 3000;
  int id_count = 20;
  int exp_count = 20;
};

/// Deterministic head-like test model. Basis columns are orthonormal in the
/// stored float32 representation to within 1e-11 and the mean shape is exactly
/// centered. Landmark footprints of the expression basis are orthogonal to
/// every affine motion, and those of the identity basis to both.
FaceModel make_synthetic_model(const SyntheticModelOptions& options);

/// Minimum vertex count accepted by make_synthetic_model: 68 landmarks plus two pupils.
inline constexpr int kMinSyntheticVertices = kLandmarkCount + 2;

}  // namespace reenact

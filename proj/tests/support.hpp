#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "reenact/morphable_model.hpp"

namespace test {

/// Default synthetic model (seed 7, V=3000, 20+20), built once per process.
inline const reenact::FaceModel& synthetic() {
  static const reenact::FaceModel model = reenact::make_synthetic_model({});
  return model;
}

/// Small model for fast property sweeps.
inline const reenact::FaceModel& small_synthetic() {
  static const reenact::FaceModel model = reenact::make_synthetic_model({3, 400, 6, 5});
  return model;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("reenact-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::FILE* f = std::fopen(p.c_str(), "rb");
  if (!f) return {};
  std::string out;
  char buf[65536];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, f)) > 0;) out.append(buf, n);
  std::fclose(f);
  return out;
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double sigma = 1.0) {
  std::normal_distribution<double> d(0.0, sigma);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

inline Eigen::Quaterniond random_rotation(std::mt19937_64& rng, double max_deg = 40.0) {
  std::uniform_real_distribution<double> u(-max_deg, max_deg);
  const double k = 3.14159265358979323846 / 180.0;
  Eigen::Quaterniond q = Eigen::AngleAxisd(u(rng) * k, Eigen::Vector3d::UnitY()) *
                         Eigen::AngleAxisd(u(rng) * k, Eigen::Vector3d::UnitX()) *
                         Eigen::AngleAxisd(u(rng) * k, Eigen::Vector3d::UnitZ());
  return q.normalized();
}

}  // namespace test

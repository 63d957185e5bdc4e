#include <fstream>

#include <json.hpp>

#include "reenact/error.hpp"
#include "reenact/tracking.hpp"

namespace reenact {

using nlohmann::json;

LandmarkFrame landmark_frame_from_json(const std::string& line) {
  LandmarkFrame f;
  try {
    const json j = json::parse(line);
    f.t = j.at("t").get<double>();
    f.width = j.at("w").get<int>();
    f.height = j.at("h").get<int>();
    const auto pts = j.at("pts").get<std::vector<double>>();
    if (pts.size() != 2 * kLandmarkCount) throw Error(ErrorCode::BadFormat, "pts must hold 136 values");
    for (int i = 0; i < kLandmarkCount; ++i) f.points.row(i) << pts[2 * i], pts[2 * i + 1];
    if (j.contains("iris") && !j.at("iris").is_null()) {
      const auto iris = j.at("iris").get<std::vector<double>>();
      if (iris.size() != 4) throw Error(ErrorCode::BadFormat, "iris must hold 4 values");
      f.iris = std::array<Eigen::Vector2d, 2>{Eigen::Vector2d(iris[0], iris[1]), Eigen::Vector2d(iris[2], iris[3])};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("landmark record: ") + e.what());
  }
  if (!(f.width > 0 && f.height > 0)) throw Error(ErrorCode::BadFormat, "frame size must be positive");
  return f;
}

std::string landmark_frame_to_json(const LandmarkFrame& f) {
  json j;
  j["t"] = f.t;
  j["w"] = f.width;
  j["h"] = f.height;
  std::vector<double> pts(2 * kLandmarkCount);
  for (int i = 0; i < kLandmarkCount; ++i) {
    pts[2 * i] = f.points(i, 0);
    pts[2 * i + 1] = f.points(i, 1);
  }
  j["pts"] = pts;
  if (f.iris) {
    j["iris"] = {(*f.iris)[0].x(), (*f.iris)[0].y(), (*f.iris)[1].x(), (*f.iris)[1].y()};
  } else {
    j["iris"] = nullptr;
  }
  return j.dump();
}

std::vector<LandmarkFrame> read_landmark_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<LandmarkFrame> frames;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    frames.push_back(landmark_frame_from_json(line));
  }
  return frames;
}

void write_landmark_file(const std::filesystem::path& path, const std::vector<LandmarkFrame>& frames) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const LandmarkFrame& f : frames) out << landmark_frame_to_json(f) << '\n';
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

}  // namespace reenact

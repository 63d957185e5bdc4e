#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "reenact/error.hpp"
#include "reenact/morphable_model.hpp"

namespace reenact {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <typename T>
std::vector<T> read_blob(const fs::path& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != expected_count * sizeof(T))
    throw Error(ErrorCode::BlobSizeMismatch, path.filename().string() + " holds " + std::to_string(bytes.size()) +
                                                 " bytes, expected " + std::to_string(expected_count * sizeof(T)));
  std::vector<T> out(expected_count);
  std::memcpy(out.data(), bytes.data(), bytes.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (T& x : out) {
      auto raw = std::bit_cast<std::array<unsigned char, sizeof(T)>>(x);
      std::reverse(raw.begin(), raw.end());
      x = std::bit_cast<T>(raw);
    }
  }
  return out;
}

template <typename T>
void write_blob(const fs::path& path, const T* data, std::size_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      auto raw = std::bit_cast<std::array<char, sizeof(T)>>(data[i]);
      std::reverse(raw.begin(), raw.end());
      out.write(raw.data(), raw.size());
    }
  }
  if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

std::size_t require_count(const json& meta, const char* key) {
  if (!meta.contains(key) || !meta[key].is_number_integer() || meta[key].get<long long>() < 0)
    throw Error(ErrorCode::BadFormat, std::string("model.json: missing or invalid ") + key);
  return meta[key].get<std::size_t>();
}

}  // namespace

FaceModel load_model(const fs::path& dir) {
  const fs::path meta_path = dir / "model.json";
  std::ifstream in(meta_path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + meta_path.string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("model.json: ") + e.what());
  }

  const std::size_t v = require_count(meta, "V");
  const std::size_t k_id = require_count(meta, "K_id");
  const std::size_t k_exp = require_count(meta, "K_exp");
  const std::size_t t = require_count(meta, "T");

  FaceModel model;
  try {
    model.name = meta.at("name").get<std::string>();
    model.id_count = static_cast<int>(k_id);
    model.exp_count = static_cast<int>(k_exp);

    const auto landmarks = meta.at("landmark_map").get<std::vector<std::uint32_t>>();
    if (landmarks.size() != kLandmarkCount) throw Error(ErrorCode::BadFormat, "landmark_map must have 68 entries");
    std::copy(landmarks.begin(), landmarks.end(), model.landmark_map.begin());

    const json& eye = meta.at("eye_meta");
    model.eye_meta.left_contour = eye.at("left_contour").get<std::vector<std::uint32_t>>();
    model.eye_meta.right_contour = eye.at("right_contour").get<std::vector<std::uint32_t>>();
    model.eye_meta.left_pupil = eye.at("left_pupil").get<std::uint32_t>();
    model.eye_meta.right_pupil = eye.at("right_pupil").get<std::uint32_t>();

    const json& blobs = meta.at("blobs");
    model.mean = read_blob<float>(dir / blobs.at("mean").get<std::string>(), 3 * v);
    model.id_basis = read_blob<float>(dir / blobs.at("id_basis").get<std::string>(), 3 * v * k_id);
    model.exp_basis = read_blob<float>(dir / blobs.at("exp_basis").get<std::string>(), 3 * v * k_exp);
    const auto tri = read_blob<std::uint32_t>(dir / blobs.at("triangles").get<std::string>(), 3 * t);
    model.triangles.resize(t);
    for (std::size_t i = 0; i < t; ++i) model.triangles[i] = {tri[3 * i], tri[3 * i + 1], tri[3 * i + 2]};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("model.json: ") + e.what());
  }

  model.validate();
  return model;
}

void save_model(const FaceModel& model, const fs::path& dir) {
  model.validate();
  std::error_code ec;
  fs::create_directories(dir / "blobs", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + (dir / "blobs").string() + ": " + ec.message());

  json meta;
  meta["name"] = model.name;
  meta["V"] = model.vertex_count();
  meta["K_id"] = model.id_count;
  meta["K_exp"] = model.exp_count;
  meta["T"] = model.triangles.size();
  meta["landmark_map"] = std::vector<std::uint32_t>(model.landmark_map.begin(), model.landmark_map.end());
  meta["eye_meta"] = {{"left_contour", model.eye_meta.left_contour},
                      {"right_contour", model.eye_meta.right_contour},
                      {"left_pupil", model.eye_meta.left_pupil},
                      {"right_pupil", model.eye_meta.right_pupil}};
  meta["blobs"] = {{"mean", "blobs/mean.f32"},
                   {"id_basis", "blobs/id.f32"},
                   {"exp_basis", "blobs/exp.f32"},
                   {"triangles", "blobs/tri.u32"}};

  write_blob(dir / "blobs/mean.f32", model.mean.data(), model.mean.size());
  write_blob(dir / "blobs/id.f32", model.id_basis.data(), model.id_basis.size());
  write_blob(dir / "blobs/exp.f32", model.exp_basis.data(), model.exp_basis.size());
  std::vector<std::uint32_t> tri;
  tri.reserve(3 * model.triangles.size());
  for (const Triangle& t : model.triangles) tri.insert(tri.end(), t.begin(), t.end());
  write_blob(dir / "blobs/tri.u32", tri.data(), tri.size());

  std::ofstream out(dir / "model.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "model.json").string());
  out << meta.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "short write to model.json");
}

}  // namespace reenact

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reenact/conditioning.hpp"
#include "reenact/error.hpp"

namespace reenact {

using nlohmann::json;

std::string Manifest::to_json() const {
  json rois = json::array();
  for (const Rect& r : mouth_rois) rois.push_back({r.x, r.y, r.w, r.h});
  json j;
  j["count"] = count;
  j["size"] = {width, height};
  j["fps"] = fps;
  j["mouth_rois"] = rois;
  j["profile_label"] = profile_label;
  return j.dump(2);
}

Manifest Manifest::from_json(const std::string& text) {
  Manifest m;
  try {
    const json j = json::parse(text);
    m.count = j.at("count").get<int>();
    const auto size = j.at("size").get<std::vector<int>>();
    if (size.size() != 2) throw Error(ErrorCode::BadFormat, "manifest size must hold 2 values");
    m.width = size[0];
    m.height = size[1];
    m.fps = j.at("fps").get<double>();
    for (const auto& r : j.at("mouth_rois")) {
      const auto v = r.get<std::vector<int>>();
      if (v.size() != 4) throw Error(ErrorCode::BadFormat, "mouth roi must hold 4 values");
      m.mouth_rois.push_back({v[0], v[1], v[2], v[3]});
    }
    m.profile_label = j.at("profile_label").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("manifest: ") + e.what());
  }
  return m;
}

namespace {

std::filesystem::path numbered(const std::filesystem::path& dir, std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "%06zu.png", i);
  return dir / name;
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

Manifest export_sequence(const std::filesystem::path& dir, const std::vector<ExportItem>& items, double fps,
                         const std::string& profile_label) {
  Manifest m;
  m.count = static_cast<int>(items.size());
  m.fps = fps;
  m.profile_label = profile_label;
  make_dir(dir / "nmfc");
  make_dir(dir / "gaze");
  bool any_real = false;
  for (const ExportItem& item : items) any_real = any_real || item.real.has_value();
  if (any_real) make_dir(dir / "real");

  for (std::size_t i = 0; i < items.size(); ++i) {
    const ConditioningFrame* f = items[i].frame;
    if (!f) throw Error(ErrorCode::InvalidArgument, "export item without a frame");
    if (i == 0) {
      m.width = f->nmfc.pixels.width;
      m.height = f->nmfc.pixels.height;
    }
    write_png(numbered(dir / "nmfc", i), f->nmfc.pixels);
    write_png(numbered(dir / "gaze", i), f->gaze.pixels);
    if (items[i].real) write_png(numbered(dir / "real", i), *items[i].real);
    m.mouth_rois.push_back(f->mouth_roi);
  }

  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write manifest in " + dir.string());
  out << m.to_json() << '\n';
  if (!out) throw Error(ErrorCode::Io, "manifest write failed");
  return m;
}

}  // namespace reenact

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reenact/conditioning.hpp"
#include "reenact/engine/perf.hpp"
#include "reenact/reenactment.hpp"

namespace reenact::engine {

/// Offline tracking of a whole clip: identity from all frames, then the
/// calibrated tracker over every frame in order.
std::vector<TrackedFrame> track_clip(const FaceModel& model, const std::vector<LandmarkFrame>& frames,
                                     const TrackerOptions& options);

struct FitTargetOptions {
  std::filesystem::path landmarks;
  std::string model = "synthetic";  // model directory or built-in synthetic name
  std::filesystem::path out_profile;
  std::string label;  // defaults to the profile file stem
  std::optional<std::filesystem::path> export_dir;
  std::optional<std::filesystem::path> images_dir;  // real frames as %06d.png
  double fps = 0.0;                                  // 0: from timestamps
  TrackerOptions tracker;
};

struct FitTargetResult {
  TargetProfile profile;
  std::vector<TrackedFrame> tracked;
  std::optional<Manifest> manifest;
};

FitTargetResult fit_target(const FitTargetOptions& options);

struct ReenactOptions {
  std::filesystem::path landmarks;
  std::filesystem::path profile;
  std::string model;  // empty: the profile's model name
  std::filesystem::path out_dir;
  SwapPolicy policy;
  std::optional<std::string> neural_endpoint;
  double fps = 0.0;
  TrackerOptions tracker;
};

struct ReenactResult {
  std::vector<TrackedFrame> swapped;
  Manifest manifest;
};

ReenactResult reenact(const ReenactOptions& options);

struct BenchOptions {
  std::string model = "synthetic";
  int size = 256;
  int frames = 200;
  std::uint64_t seed = 1;
};

/// Synthetic landmark stream through a full session (track, swap, render,
/// PNG encode).
PerfReport bench(const BenchOptions& options);

/// Frame rate implied by the median timestamp step; `fallback` when unknown.
double clip_fps(const std::vector<LandmarkFrame>& frames, double fallback = 30.0);

}  // namespace reenact::engine

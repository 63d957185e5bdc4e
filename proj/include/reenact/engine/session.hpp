#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "reenact/conditioning.hpp"
#include "reenact/engine/neural_client.hpp"
#include "reenact/engine/perf.hpp"
#include "reenact/engine/protocol.hpp"
#include "reenact/reenactment.hpp"

namespace reenact::engine {

/// Name of the built-in synthetic model, available without a models directory.
inline constexpr const char* kSyntheticModelName = "synthetic";

struct LoadedModel {
  std::shared_ptr<const FaceModel> model;
  std::shared_ptr<const NmfcPalette> palette;
};

/// Loads models by name from `<dir>/<name>/` once and shares them read-only.
class ModelStore {
 public:
  explicit ModelStore(std::filesystem::path dir) : dir_(std::move(dir)) {}
  LoadedModel get(const std::string& name);

 private:
  std::filesystem::path dir_;
  std::mutex mutex_;
  std::map<std::string, LoadedModel> cache_;
};

/// Reads a model reference given on the command line: a model directory, or
/// the built-in synthetic model name.
LoadedModel load_model_ref(const std::string& ref);

struct ProfileEntry {
  std::string label;
  std::string model_name;
  std::filesystem::path path;
};

/// Every readable profile JSON in `dir`, sorted by label.
std::vector<ProfileEntry> list_profiles(const std::filesystem::path& dir);
std::string profiles_to_json(const std::vector<ProfileEntry>& profiles);

struct SessionOptions {
  RasterSettings raster;
  bool binary = false;
  TrackerOptions tracker;
};

struct ProcessedFrame {
  TrackedFrame tracked;
  TrackedFrame swapped;
  ConditioningFrame conditioning;
  FrameMessage message;
  FrameTiming timing;
};

/// One live stream: tracker, target profile, policy and perf accounting.
/// Not thread-safe; the server serializes calls per session.
class Session {
 public:
  Session(std::string id, LoadedModel model, TargetProfile profile, SessionOptions options,
          std::unique_ptr<NeuralClient> neural = nullptr);

  const std::string& id() const { return id_; }
  const TargetProfile& profile() const { return profile_; }
  const SwapPolicy& policy() const { return policy_; }
  void set_policy(const SwapPolicy& policy);

  /// Track, swap, render, encode, optional neural pass. A degenerate first
  /// frame throws ProtocolError{"degenerate"}.
  ProcessedFrame process(const LandmarkFrame& frame);

  PerfReport perf() const { return perf_.report(); }

 private:
  std::string id_;
  LoadedModel model_;
  TargetProfile profile_;
  SessionOptions options_;
  std::unique_ptr<NeuralClient> neural_;
  SwapPolicy policy_;
  TrackerState tracker_;
  PoseStatsAccumulator source_stats_;
  PerfAccumulator perf_;
};

}  // namespace reenact::engine

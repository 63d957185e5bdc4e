#include "reenact/engine/session.hpp"

#include <algorithm>
#include <chrono>

#include <json.hpp>

#include "reenact/error.hpp"

namespace reenact::engine {

namespace {

std::optional<std::uint64_t> synthetic_seed(const std::string& name) {
  if (name == kSyntheticModelName) return SyntheticModelOptions{}.seed;
  const std::string prefix = std::string(kSyntheticModelName) + "-";
  if (name.rfind(prefix, 0) != 0 || name.size() == prefix.size()) return std::nullopt;
  const std::string digits = name.substr(prefix.size());
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) return std::nullopt;
  return std::stoull(digits);
}

LoadedModel wrap(FaceModel model) {
  LoadedModel m;
  m.palette = std::make_shared<const NmfcPalette>(nmfc_palette(model));
  m.model = std::make_shared<const FaceModel>(std::move(model));
  return m;
}

double elapsed_ms(std::chrono::steady_clock::time_point from, std::chrono::steady_clock::time_point to) {
  return std::chrono::duration<double, std::milli>(to - from).count();
}

}  // namespace

LoadedModel load_model_ref(const std::string& ref) {
  if (std::filesystem::is_directory(ref)) return wrap(load_model(ref));
  if (auto seed = synthetic_seed(ref)) {
    SyntheticModelOptions o;
    o.seed = *seed;
    return wrap(make_synthetic_model(o));
  }
  throw Error(ErrorCode::Io, "no model directory '" + ref + "'");
}

LoadedModel ModelStore::get(const std::string& name) {
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(name); it != cache_.end()) return it->second;
  LoadedModel m;
  const std::filesystem::path dir = dir_ / name;
  if (name.find('/') == std::string::npos && name != ".." && !dir_.empty() && std::filesystem::is_directory(dir)) {
    m = wrap(load_model(dir));
  } else if (auto seed = synthetic_seed(name)) {
    SyntheticModelOptions o;
    o.seed = *seed;
    m = wrap(make_synthetic_model(o));
  } else {
    throw ProtocolError("unknown_model", "no model named '" + name + "'");
  }
  cache_.emplace(name, m);
  return m;
}

std::vector<ProfileEntry> list_profiles(const std::filesystem::path& dir) {
  std::vector<ProfileEntry> out;
  std::error_code ec;
  if (dir.empty() || !std::filesystem::is_directory(dir, ec)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.path().extension() != ".json") continue;
    try {
      const TargetProfile p = load_profile(entry.path());
      out.push_back({p.label, p.model_name, entry.path()});
    } catch (const Error&) {
      // Not a profile; skip.
    }
  }
  std::sort(out.begin(), out.end(), [](const ProfileEntry& a, const ProfileEntry& b) {
    return a.label != b.label ? a.label < b.label : a.path < b.path;
  });
  return out;
}

std::string profiles_to_json(const std::vector<ProfileEntry>& profiles) {
  nlohmann::json j = nlohmann::json::array();
  for (const ProfileEntry& p : profiles) j.push_back({{"label", p.label}, {"model", p.model_name}});
  return j.dump();
}

Session::Session(std::string id, LoadedModel model, TargetProfile profile, SessionOptions options,
                 std::unique_ptr<NeuralClient> neural)
    : id_(std::move(id)),
      model_(std::move(model)),
      profile_(std::move(profile)),
      options_(options),
      neural_(std::move(neural)),
      tracker_(model_.model, options.tracker) {
  options_.raster.validate();
  profile_.validate();
  if (profile_.model_name != model_.model->name)
    throw ProtocolError("model_mismatch", "profile '" + profile_.label + "' was fitted with model '" +
                                              profile_.model_name + "', session uses '" + model_.model->name + "'");
  if (profile_.identity.alpha.size() != model_.model->id_count ||
      profile_.expression_range.min.size() != model_.model->exp_count)
    throw ProtocolError("model_mismatch", "profile parameter counts do not match the model");
}

void Session::set_policy(const SwapPolicy& policy) {
  try {
    policy.validate();
  } catch (const Error& e) {
    throw ProtocolError("bad_message", e.what());
  }
  policy_ = policy;
}

ProcessedFrame Session::process(const LandmarkFrame& frame) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  ProcessedFrame out;
  try {
    out.tracked = track_frame(tracker_, frame);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateConfiguration) throw ProtocolError("degenerate", e.what());
    throw;
  }
  const auto t1 = clock::now();

  if (!out.tracked.stale) source_stats_.add(out.tracked.pose);
  const PoseStats src = source_stats_.stats();
  out.swapped = swap_identity(out.tracked, profile_, policy_, source_stats_.count() > 0 ? &src : nullptr);
  const auto t2 = clock::now();

  out.conditioning = render_conditioning(*model_.model, out.swapped, *model_.palette, options_.raster);
  const auto t3 = clock::now();

  FrameMessage& m = out.message;
  m.t = frame.t;
  m.mouth_roi = out.conditioning.mouth_roi;
  m.diagnostics.identity.assign(out.swapped.identity.alpha.data(),
                                out.swapped.identity.alpha.data() + out.swapped.identity.alpha.size());
  m.diagnostics.residual_rmse = out.tracked.residual_rmse;
  m.diagnostics.stale = out.tracked.stale;
  m.binary = options_.binary;
  if (options_.binary) {
    m.width = options_.raster.width;
    m.height = options_.raster.height;
    m.nmfc = out.conditioning.nmfc.pixels.rgb;
    m.gaze = out.conditioning.gaze.pixels.rgb;
  } else {
    m.nmfc = encode_png(out.conditioning.nmfc.pixels);
    m.gaze = encode_png(out.conditioning.gaze.pixels);
  }
  const auto t4 = clock::now();

  if (neural_) {
    FrameMessage request = m;
    if (options_.binary) {
      request.nmfc = encode_png(out.conditioning.nmfc.pixels);
      request.gaze = encode_png(out.conditioning.gaze.pixels);
    }
    try {
      m.output = neural_->infer(request);
    } catch (const Error& e) {
      throw ProtocolError("neural_failed", e.what());
    }
  }

  out.timing.track_ms = elapsed_ms(t0, t1);
  out.timing.swap_ms = elapsed_ms(t1, t2);
  out.timing.render_ms = elapsed_ms(t2, t3);
  out.timing.encode_ms = elapsed_ms(t3, t4);
  out.timing.total_ms = elapsed_ms(t0, clock::now());
  out.timing.stale = out.tracked.stale;
  m.latency_ms = out.timing.total_ms;
  perf_.add(out.timing);
  return out;
}

}  // namespace reenact::engine

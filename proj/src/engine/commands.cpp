#include "reenact/engine/commands.hpp"

#include <algorithm>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "reenact/engine/neural_client.hpp"
#include "reenact/engine/session.hpp"
#include "reenact/error.hpp"

namespace reenact::engine {

namespace {

RasterSettings raster_for(const std::vector<LandmarkFrame>& frames) {
  RasterSettings s;
  s.width = frames.front().width;
  s.height = frames.front().height;
  s.validate();
  return s;
}

std::filesystem::path numbered(const std::filesystem::path& dir, std::size_t i) {
  char name[32];
  std::snprintf(name, sizeof name, "%06zu.png", i);
  return dir / name;
}

std::vector<ExportItem> export_items(const std::vector<ConditioningFrame>& frames,
                                     const std::optional<std::filesystem::path>& images_dir) {
  std::vector<ExportItem> items;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    ExportItem item{&frames[i], std::nullopt};
    if (images_dir) item.real = read_png(numbered(*images_dir, i));
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace

double clip_fps(const std::vector<LandmarkFrame>& frames, double fallback) {
  std::vector<double> steps;
  for (std::size_t i = 1; i < frames.size(); ++i)
    if (frames[i].t > frames[i - 1].t) steps.push_back(frames[i].t - frames[i - 1].t);
  if (steps.empty()) return fallback;
  std::nth_element(steps.begin(), steps.begin() + steps.size() / 2, steps.end());
  return 1.0 / steps[steps.size() / 2];
}

std::vector<TrackedFrame> track_clip(const FaceModel& model, const std::vector<LandmarkFrame>& frames,
                                     const TrackerOptions& options) {
  if (frames.empty()) throw Error(ErrorCode::EmptyClip, "landmark file has no frames");
  const IdentityFit id = fit_identity(model, frames, options.solver);
  TrackerState state(std::make_shared<const FaceModel>(model), options);
  state.calibrate(id.identity);
  std::vector<TrackedFrame> out;
  out.reserve(frames.size());
  for (const LandmarkFrame& f : frames) out.push_back(track_frame(state, f));
  return out;
}

FitTargetResult fit_target(const FitTargetOptions& o) {
  const LoadedModel m = load_model_ref(o.model);
  const std::vector<LandmarkFrame> frames = read_landmark_file(o.landmarks);
  if (frames.empty()) throw Error(ErrorCode::EmptyClip, "landmark file has no frames");
  const RasterSettings raster = raster_for(frames);

  FitTargetResult r;
  r.tracked = track_clip(*m.model, frames, o.tracker);
  std::vector<TrackedFrame> fresh;
  for (const TrackedFrame& f : r.tracked)
    if (!f.stale) fresh.push_back(f);
  const std::string label = o.label.empty() ? o.out_profile.stem().string() : o.label;
  r.profile = build_target_profile(fresh, label);

  std::vector<ConditioningFrame> cond;
  if (o.export_dir) {
    for (const TrackedFrame& f : r.tracked) cond.push_back(render_conditioning(*m.model, f, *m.palette, raster));
  }
  save_profile(r.profile, o.out_profile);
  if (o.export_dir) {
    const double fps = o.fps > 0.0 ? o.fps : clip_fps(frames);
    r.manifest = export_sequence(*o.export_dir, export_items(cond, o.images_dir), fps, label);
  }
  spdlog::info("fit-target: {} frames, profile '{}' written to {}", frames.size(), label, o.out_profile.string());
  return r;
}

ReenactResult reenact(const ReenactOptions& o) {
  o.policy.validate();
  const TargetProfile profile = load_profile(o.profile);
  const LoadedModel m = load_model_ref(o.model.empty() ? profile.model_name : o.model);
  const std::vector<LandmarkFrame> frames = read_landmark_file(o.landmarks);
  if (frames.empty()) throw Error(ErrorCode::EmptyClip, "landmark file has no frames");
  const RasterSettings raster = raster_for(frames);

  const std::vector<TrackedFrame> tracked = track_clip(*m.model, frames, o.tracker);
  PoseStatsAccumulator acc;
  for (const TrackedFrame& f : tracked)
    if (!f.stale) acc.add(f.pose);
  const PoseStats source = acc.stats();

  ReenactResult r;
  std::vector<ConditioningFrame> cond;
  for (const TrackedFrame& f : tracked) {
    r.swapped.push_back(swap_identity(f, profile, o.policy, acc.count() > 0 ? &source : nullptr));
    cond.push_back(render_conditioning(*m.model, r.swapped.back(), *m.palette, raster));
  }

  std::vector<std::vector<std::uint8_t>> outputs;
  if (o.neural_endpoint) {
    NeuralClient client(*o.neural_endpoint);
    for (const ConditioningFrame& c : cond) {
      FrameMessage req;
      req.t = c.t;
      req.nmfc = encode_png(c.nmfc.pixels);
      req.gaze = encode_png(c.gaze.pixels);
      req.mouth_roi = c.mouth_roi;
      outputs.push_back(client.infer(req));
    }
  }

  const double fps = o.fps > 0.0 ? o.fps : clip_fps(frames);
  r.manifest = export_sequence(o.out_dir, export_items(cond, std::nullopt), fps, profile.label);
  if (!outputs.empty()) {
    std::filesystem::create_directories(o.out_dir / "output");
    for (std::size_t i = 0; i < outputs.size(); ++i) write_png(numbered(o.out_dir / "output", i), decode_png(outputs[i]));
  }
  spdlog::info("reenact: {} frames onto profile '{}' in {}", frames.size(), profile.label, o.out_dir.string());
  return r;
}

PerfReport bench(const BenchOptions& o) {
  const LoadedModel m = load_model_ref(o.model);
  if (o.frames <= 0) throw Error(ErrorCode::InvalidArgument, "bench needs at least one frame");

  SyntheticClipOptions target_clip;
  target_clip.seed = o.seed + 1000;
  target_clip.frames = 60;
  target_clip.width = target_clip.height = o.size;
  target_clip.noise_px = 0.5;
  const auto target = make_synthetic_clip(*m.model, target_clip);
  const TargetProfile profile = build_target_profile(track_clip(*m.model, target.frames, {}), "bench-target");

  SyntheticClipOptions source_clip;
  source_clip.seed = o.seed;
  source_clip.frames = o.frames;
  source_clip.width = source_clip.height = o.size;
  source_clip.noise_px = 0.5;
  const auto source = make_synthetic_clip(*m.model, source_clip);

  SessionOptions opts;
  opts.raster.width = opts.raster.height = o.size;
  Session session("bench", m, profile, opts);
  for (const LandmarkFrame& f : source.frames) session.process(f);
  return session.perf();
}

}  // namespace reenact::engine

#include "reenact/engine/perf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace reenact::engine {

double percentile(std::vector<double> samples, double q) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const double rank = std::ceil(q / 100.0 * static_cast<double>(samples.size()));
  const std::size_t idx = static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(samples.size()))) - 1;
  return samples[idx];
}

void PerfAccumulator::add(const FrameTiming& t) {
  track_.push_back(t.track_ms);
  swap_.push_back(t.swap_ms);
  render_.push_back(t.render_ms);
  encode_.push_back(t.encode_ms);
  total_.push_back(t.total_ms);
  if (t.stale) ++stale_;
}

PerfReport PerfAccumulator::report() const {
  auto stage = [](const std::vector<double>& v) { return StageLatency{percentile(v, 50), percentile(v, 95)}; };
  PerfReport r;
  r.track = stage(track_);
  r.swap = stage(swap_);
  r.render = stage(render_);
  r.encode = stage(encode_);
  r.total = stage(total_);
  r.frames_processed = count();
  r.frames_stale = stale_;
  const double sum_ms = std::accumulate(total_.begin(), total_.end(), 0.0);
  if (sum_ms > 0.0) r.fps_mean = 1000.0 * static_cast<double>(total_.size()) / sum_ms;
  if (r.total.p95 > 0.0) r.fps_p5 = 1000.0 / r.total.p95;
  return r;
}

std::string PerfReport::to_json() const {
  using nlohmann::json;
  auto stage = [](const StageLatency& s) { return json{{"p50", s.p50}, {"p95", s.p95}}; };
  json j;
  j["fps_mean"] = fps_mean;
  j["fps_p5"] = fps_p5;
  j["latency_ms"] = {{"track", stage(track)},
                     {"swap", stage(swap)},
                     {"render", stage(render)},
                     {"encode", stage(encode)},
                     {"total", stage(total)}};
  j["frames_processed"] = frames_processed;
  j["frames_stale"] = frames_stale;
  return j.dump(2);
}

}  // namespace reenact::engine

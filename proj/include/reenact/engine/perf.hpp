#pragma once

#include <string>
#include <vector>

namespace reenact::engine {

struct StageLatency {
  double p50 = 0.0;  // milliseconds
  double p95 = 0.0;
};

struct PerfReport {
  double fps_mean = 0.0;
  double fps_p5 = 0.0;
  StageLatency track, swap, render, encode, total;
  int frames_processed = 0;
  int frames_stale = 0;

  std::string to_json() const;
};

struct FrameTiming {
  double track_ms = 0.0;
  double swap_ms = 0.0;
  double render_ms = 0.0;
  double encode_ms = 0.0;
  double total_ms = 0.0;
  bool stale = false;
};

/// Nearest-rank percentile (q in [0,100]) of unsorted samples; 0 when empty.
double percentile(std::vector<double> samples, double q);

class PerfAccumulator {
 public:
  void add(const FrameTiming& timing);
  /// fps_mean = frames / summed total latency; fps_p5 = 1000 / p95(total).
  PerfReport report() const;
  int count() const { return static_cast<int>(total_.size()); }

 private:
  std::vector<double> track_, swap_, render_, encode_, total_;
  int stale_ = 0;
};

}  // namespace reenact::engine

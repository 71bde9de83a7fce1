#pragma once

// Per-frame pipeline: open -> skeletonize -> walk -> chain -> fit. Stateless; every frame is
// processed independently.

#include <algorithm>
#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cablefit/chainer.hpp"
#include "cablefit/mask_io.hpp"
#include "cablefit/metrics.hpp"
#include "cablefit/skeleton.hpp"
#include "cablefit/spline.hpp"
#include "cablefit/walker.hpp"

namespace cablefit {

struct TrackerConfig {
  double m = 0.05;
  int p = 10;
  int k = 25;
  double j_th = 10.0;
  int w = 10;
  int open_kernel = 3;

  ChainerParams chainer() const { return {m, p, j_th, w}; }

  void validate() const {
    chainer().validate();
    if (k < 1) throw Error("k must be >= 1");
    if (open_kernel < 3 || open_kernel % 2 == 0) throw Error("open kernel must be odd and >= 3");
  }
};

struct StageTimings {
  static constexpr std::array<std::string_view, 5> kNames{"open", "skeletonize", "walk", "chain", "fit"};
  std::array<double, 5> ms{};

  double sum() const {
    double s = 0.0;
    for (double v : ms) s += v;
    return s;
  }
};

struct FrameResult {
  std::vector<BSplineCurve> instances;
  std::vector<SegmentChain> chains;  // chains[i] produced instances[i]
  double elapsed_ms = 0.0;
  StageTimings stage_timings;
  std::vector<std::string> diagnostics;
};

namespace detail {

class StageClock {
 public:
  StageClock() : start_(now()), last_(start_) {}
  double lap() {
    const auto t = now();
    const double ms = std::chrono::duration<double, std::milli>(t - last_).count();
    last_ = t;
    return ms;
  }
  double total() const { return std::chrono::duration<double, std::milli>(now() - start_).count(); }

 private:
  static std::chrono::steady_clock::time_point now() { return std::chrono::steady_clock::now(); }
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point last_;
};

inline FrameResult run_pipeline(const BinaryMask& mask, const DepthMap* depth, const TrackerConfig& cfg) {
  cfg.validate();
  FrameResult result;
  StageClock clock;

  const BinaryMask opened = morphological_open(mask, cfg.open_kernel);
  result.stage_timings.ms[0] = clock.lap();

  const Skeleton skel = remove_branch_points(skeletonize_raster(opened));
  result.stage_timings.ms[1] = clock.lap();

  const auto paths = filter_short(walk_segments(skel), cfg.p);
  result.stage_timings.ms[2] = clock.lap();

  auto chains = chain_greedy(paths, cfg.chainer());
  for (auto& c : chains)
    if (c.last_pixel() < c.first_pixel()) c = reversed(c);
  std::stable_sort(chains.begin(), chains.end(),
                   [](const SegmentChain& a, const SegmentChain& b) { return a.first_pixel() < b.first_pixel(); });
  result.stage_timings.ms[3] = clock.lap();

  for (std::size_t i = 0; i < chains.size(); ++i) {
    ParameterizedChain pc = parameterize(chains[i]);
    const int k = usable_knot_count(pc.t.size(), cfg.k);
    if (k == 0) {
      result.diagnostics.push_back("chain " + std::to_string(i) + ": skipped, only " + std::to_string(pc.t.size()) +
                                   " samples");
      continue;
    }
    if (depth) {
      if (auto lifted = lift_to_3d(pc, *depth)) {
        pc = std::move(*lifted);
      } else {
        result.diagnostics.push_back("chain " + std::to_string(i) + ": no valid depth, fitted in 2D");
      }
    }
    result.instances.push_back(fit(pc, k));
    result.chains.push_back(std::move(chains[i]));
  }
  result.stage_timings.ms[4] = clock.lap();
  result.elapsed_ms = clock.total();
  return result;
}

}  // namespace detail

/// One cubic B-spline per detected cable instance.
inline FrameResult track_frame(const BinaryMask& mask, const TrackerConfig& cfg = {}) {
  return detail::run_pipeline(mask, nullptr, cfg);
}

/// As track_frame, with z taken from `depth`; instances without depth support stay 2D.
inline FrameResult track_frame_3d(const BinaryMask& mask, const DepthMap& depth, const TrackerConfig& cfg = {}) {
  if (depth.width() != mask.width() || depth.height() != mask.height())
    throw Error("depth " + std::to_string(depth.width()) + "x" + std::to_string(depth.height()) +
                " does not match mask " + std::to_string(mask.width()) + "x" + std::to_string(mask.height()));
  return detail::run_pipeline(mask, &depth, cfg);
}

inline CurveDocument to_document(const FrameResult& result, int width, int height, std::string source) {
  CurveDocument doc;
  doc.frame = {width, height, std::move(source), result.elapsed_ms};
  doc.instances = result.instances;
  return doc;
}

struct InstanceLink {
  std::size_t previous = 0;
  std::size_t current = 0;
  double l3 = 0.0;
};

/// Frame-to-frame identity: greedy pairing of previous and current instances by smallest L3,
/// ordered by current index. Unlinked current instances are new; unlinked previous ones vanished.
inline std::vector<InstanceLink> associate_instances(std::span<const BSplineCurve> previous,
                                                     std::span<const BSplineCurve> current,
                                                     std::size_t samples = kDefaultMetricSamples) {
  std::vector<DiscretizedCurve> prev, cur;
  for (const auto& c : previous) prev.push_back(discretized(c, samples));
  for (const auto& c : current) cur.push_back(discretized(c, samples));
  std::vector<InstanceLink> out;
  for (const auto& m : match_instances(cur, prev)) out.push_back({m.reference, m.predicted, m.l3});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.current < b.current; });
  return out;
}

}  // namespace cablefit

#pragma once

// Evaluation criteria. L1/L2 are Mean Minimal Distances between mask pixels and curve samples;
// L3 is a symmetrized mean distance between two curves aligned by normalized arc length.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "cablefit/curve.hpp"
#include "cablefit/spline.hpp"
#include "cablefit/types.hpp"

namespace cablefit {

inline constexpr std::size_t kDefaultMetricSamples = 512;

/// Exact nearest-neighbor search over a fixed point set using square buckets in the xy plane.
/// Distances are full 3D; the planar bucket bound stays a valid lower bound.
class PointIndex {
 public:
  explicit PointIndex(std::span<const Point> points) : points_(points.begin(), points.end()) {
    if (points_.empty()) throw Error("cannot index an empty point set");
    double x1 = points_[0].x, y1 = points_[0].y;
    x0_ = x1;
    y0_ = y1;
    for (const auto& p : points_) {
      x0_ = std::min(x0_, p.x);
      y0_ = std::min(y0_, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
    const double area = std::max(x1 - x0_, 1.0) * std::max(y1 - y0_, 1.0);
    cell_ = std::max(std::sqrt(area / static_cast<double>(points_.size())) * 2.0, 1e-6);
    nx_ = static_cast<int>((x1 - x0_) / cell_) + 1;
    ny_ = static_cast<int>((y1 - y0_) / cell_) + 1;
    start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    std::vector<std::size_t> cell_of(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
      cell_of[i] = cell_index(cell_x(points_[i].x), cell_y(points_[i].y));
      ++start_[cell_of[i] + 1];
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    order_.resize(points_.size());
    auto fill = start_;
    for (std::size_t i = 0; i < points_.size(); ++i) order_[fill[cell_of[i]]++] = i;
  }

  /// Distance from `q` to its nearest indexed point.
  double nearest_distance(const Point& q) const {
    const int cx = cell_x(q.x);
    const int cy = cell_y(q.y);
    double best2 = std::numeric_limits<double>::infinity();
    const int max_r = std::max(nx_, ny_) + 1;
    for (int r = 0; r <= max_r; ++r) {
      for (int y = cy - r; y <= cy + r; ++y) {
        if (y < 0 || y >= ny_) continue;
        const bool edge_row = (y == cy - r || y == cy + r);
        for (int x = cx - r; x <= cx + r; x += (edge_row ? 1 : 2 * std::max(r, 1))) {
          if (x >= 0 && x < nx_) scan_cell(cell_index(x, y), q, best2);
          if (r == 0) break;
        }
      }
      // Everything not yet scanned lies outside the box of rings 0..r.
      const double bx0 = x0_ + (cx - r) * cell_, bx1 = x0_ + (cx + r + 1) * cell_;
      const double by0 = y0_ + (cy - r) * cell_, by1 = y0_ + (cy + r + 1) * cell_;
      const double bound = std::max(0.0, std::min({q.x - bx0, bx1 - q.x, q.y - by0, by1 - q.y}));
      if (best2 <= bound * bound) break;
    }
    return std::sqrt(best2);
  }

 private:
  int cell_x(double x) const { return std::clamp(static_cast<int>(std::floor((x - x0_) / cell_)), 0, nx_ - 1); }
  int cell_y(double y) const { return std::clamp(static_cast<int>(std::floor((y - y0_) / cell_)), 0, ny_ - 1); }
  std::size_t cell_index(int x, int y) const { return static_cast<std::size_t>(y) * nx_ + x; }

  void scan_cell(std::size_t c, const Point& q, double& best2) const {
    for (std::size_t k = start_[c]; k < start_[c + 1]; ++k) {
      const Point d = points_[order_[k]] - q;
      best2 = std::min(best2, dot(d, d));
    }
  }

  std::vector<Point> points_;
  double x0_ = 0.0, y0_ = 0.0, cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

/// Mean over X of the distance to the nearest point of Y.
inline double mmd(std::span<const Point> x, std::span<const Point> y) {
  if (x.empty() || y.empty()) throw Error("mmd needs two non-empty point sets");
  const PointIndex index(y);
  double acc = 0.0;
  for (const auto& p : x) acc += index.nearest_distance(p);
  return acc / static_cast<double>(x.size());
}

struct CoverageScores {
  double l1 = 0.0;  // mask -> curve
  double l2 = 0.0;  // curve -> mask
};

/// L1 = mmd(mask pixels, curve samples), L2 = mmd(curve samples, mask pixels). Samples from all
/// curves are pooled; depth is ignored.
inline CoverageScores l1_l2(const BinaryMask& mask, std::span<const BSplineCurve> curves,
                            std::size_t samples = kDefaultMetricSamples) {
  std::vector<Point> pixels;
  for (auto p : mask.pixels()) pixels.push_back(to_point(p));
  if (pixels.empty()) throw Error("L1/L2 need a non-empty mask");
  if (curves.empty()) throw Error("L1/L2 need at least one curve");
  std::vector<Point> pts;
  for (const auto& c : curves)
    for (auto p : sample_uniform(c, samples)) pts.push_back({p.x, p.y, 0.0});
  return {mmd(pixels, pts), mmd(pts, pixels)};
}

inline CoverageScores l1_l2(const BinaryMask& mask, const BSplineCurve& curve, std::size_t samples = kDefaultMetricSamples) {
  return l1_l2(mask, std::span<const BSplineCurve>(&curve, 1), samples);
}

/// Polyline with normalized cumulative arc length per vertex.
struct DiscretizedCurve {
  std::vector<Point> points;
  std::vector<double> cum_norm_dist;
};

inline DiscretizedCurve discretized(std::vector<Point> points) {
  if (points.size() < 2) throw Error("a discretized curve needs at least two points");
  DiscretizedCurve c;
  c.cum_norm_dist.resize(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i)
    c.cum_norm_dist[i] = c.cum_norm_dist[i - 1] + distance(points[i - 1], points[i]);
  const double total = c.cum_norm_dist.back();
  if (!(total > 0.0)) throw Error("degenerate zero-length curve");
  for (auto& d : c.cum_norm_dist) d /= total;
  c.cum_norm_dist.back() = 1.0;
  c.points = std::move(points);
  return c;
}

inline DiscretizedCurve discretized(const BSplineCurve& curve, std::size_t samples = kDefaultMetricSamples) {
  return discretized(sample_uniform(curve, samples));
}

inline DiscretizedCurve reversed(const DiscretizedCurve& c) {
  std::vector<Point> pts(c.points.rbegin(), c.points.rend());
  return discretized(std::move(pts));
}

/// Segment index k with D_Y(k) <= d <= D_Y(k+1); the smallest such k.
inline std::size_t aligned_segment(const DiscretizedCurve& y, double d) {
  const auto& dy = y.cum_norm_dist;
  const auto it = std::lower_bound(dy.begin() + 1, dy.end(), d);
  const auto k = static_cast<std::size_t>(it - (dy.begin() + 1));
  return std::min(k, dy.size() - 2);
}

/// Distance from `p` to segment [a, b].
inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  const double w = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + ab * w);
}

/// Directed aligned mean distance F(X, Y).
inline double aligned_mean_distance(const DiscretizedCurve& x, const DiscretizedCurve& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.points.size(); ++i) {
    const std::size_t k = i + 1 == x.points.size() ? y.points.size() - 2 : aligned_segment(y, x.cum_norm_dist[i]);
    acc += point_segment_distance(x.points[i], y.points[k], y.points[k + 1]);
  }
  return acc / static_cast<double>(x.points.size());
}

/// (F(A, B) + F(B, A)) / 2. Orientation-sensitive.
inline double l3(const DiscretizedCurve& a, const DiscretizedCurve& b) {
  return 0.5 * (aligned_mean_distance(a, b) + aligned_mean_distance(b, a));
}

/// L3 minimized over the two orientations of `b`.
inline double l3_unoriented(const DiscretizedCurve& a, const DiscretizedCurve& b) {
  return std::min(l3(a, b), l3(a, reversed(b)));
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

inline MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

struct InstanceMatch {
  std::size_t predicted = 0;
  std::size_t reference = 0;
  double l3 = 0.0;
};

/// Greedy one-to-one association by smallest unoriented L3. Unmatched entries on either side are
/// missing (reference) or redundant (predicted) instances.
inline std::vector<InstanceMatch> match_instances(std::span<const DiscretizedCurve> predicted,
                                                  std::span<const DiscretizedCurve> reference) {
  std::vector<InstanceMatch> all;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    for (std::size_t j = 0; j < reference.size(); ++j) all.push_back({i, j, l3_unoriented(predicted[i], reference[j])});
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.l3 < b.l3; });
  std::vector<std::uint8_t> used_p(predicted.size(), 0), used_r(reference.size(), 0);
  std::vector<InstanceMatch> out;
  for (const auto& m : all) {
    if (used_p[m.predicted] || used_r[m.reference]) continue;
    used_p[m.predicted] = used_r[m.reference] = 1;
    out.push_back(m);
  }
  return out;
}

}  // namespace cablefit

#pragma once

// Arc-length parameterization of chained pixels, index-equidistant knot placement and
// least-squares cubic B-spline fitting (2D, or 3D after a depth lift).

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "cablefit/chainer.hpp"
#include "cablefit/curve.hpp"
#include "cablefit/types.hpp"

namespace cablefit {

/// Raised when a chain has too few samples for the requested knot count.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Fit input: one parameter value per sample.
struct ParameterizedChain {
  int dim = 2;
  std::vector<double> t;  // t[0] == 0, strictly increasing
  std::vector<Point> coords;
};

/// Drops samples whose parameter does not exceed the previous kept one.
inline void collapse_duplicates(ParameterizedChain& pc) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < pc.t.size(); ++i) {
    if (out > 0 && !(pc.t[i] > pc.t[out - 1])) continue;
    pc.t[out] = pc.t[i];
    pc.coords[out] = pc.coords[i];
    ++out;
  }
  pc.t.resize(out);
  pc.coords.resize(out);
}

/// Cumulative step length inside segments plus the Euclidean gaps between them.
inline ParameterizedChain parameterize(const SegmentChain& chain) {
  if (chain.segments.empty()) throw Error("cannot parameterize an empty chain");
  ParameterizedChain pc;
  pc.t.reserve(chain.pixel_count());
  pc.coords.reserve(chain.pixel_count());
  double t = 0.0;
  for (std::size_t s = 0; s < chain.segments.size(); ++s) {
    const auto pts = chain.segments[s].oriented_points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) t += step_length(pts[i - 1], pts[i]);
      else if (s > 0) t += chain.gap_distances[s - 1];
      pc.t.push_back(t);
      pc.coords.push_back(to_point(pts[i]));
    }
  }
  collapse_duplicates(pc);
  return pc;
}

/// Number of interior knots actually used for `samples` data points when `requested` are asked
/// for: requested, reduced so that samples >= knots + 4. Zero means no cubic fit is possible.
inline int usable_knot_count(std::size_t samples, int requested) {
  if (samples < 5) return 0;
  return std::max(1, std::min(requested, static_cast<int>(samples) - 4));
}

/// Clamped knot vector with `k` interior knots at t[round((j+1)(n-1)/(k+1))], j = 0..k-1.
inline std::vector<double> place_knots(const std::vector<double>& t, int k) {
  if (k < 1) throw Error("knot count must be >= 1");
  if (t.size() < static_cast<std::size_t>(k) + 4)
    throw InsufficientData("insufficient data: " + std::to_string(t.size()) + " samples for " + std::to_string(k) +
                           " interior knots");
  const double last = static_cast<double>(t.size() - 1);
  std::vector<double> knots(4, t.front());
  for (int j = 0; j < k; ++j) {
    const auto idx = static_cast<std::size_t>(std::lround((j + 1) * last / (k + 1)));
    knots.push_back(t[idx]);
  }
  knots.insert(knots.end(), 4, t.back());
  return knots;
}

/// Knot span index s with knots[s] <= t < knots[s+1]; the right end maps to the last non-empty span.
inline std::size_t find_span(const std::vector<double>& knots, double t) {
  const std::size_t n_ctrl = knots.size() - kCubic - 1;
  if (t >= knots[n_ctrl]) return n_ctrl - 1;
  std::size_t lo = kCubic;
  std::size_t hi = n_ctrl;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (t < knots[mid]) hi = mid;
    else lo = mid;
  }
  return lo;
}

/// The four cubic basis functions that are non-zero on `span`, for columns span-3..span.
inline std::array<double, 4> basis_functions(const std::vector<double>& knots, std::size_t span, double t) {
  std::array<double, 4> n{1.0, 0.0, 0.0, 0.0};
  std::array<double, 4> left{}, right{};
  for (int j = 1; j <= kCubic; ++j) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    n[j] = saved;
  }
  return n;
}

/// De Boor evaluation. Throws for t outside [t_min, t_max].
inline Point evaluate(const BSplineCurve& curve, double t) {
  if (!(t >= curve.t_min && t <= curve.t_max)) throw Error("evaluation parameter outside the curve's range");
  const auto& u = curve.knots;
  const std::size_t s = find_span(u, t);
  std::array<Point, 4> d;
  for (int j = 0; j <= kCubic; ++j) d[j] = curve.control_points[s - kCubic + j];
  for (int r = 1; r <= kCubic; ++r)
    for (int j = kCubic; j >= r; --j) {
      const std::size_t i = s - kCubic + j;
      const double denom = u[i + kCubic + 1 - r] - u[i];
      const double alpha = denom > 0.0 ? (t - u[i]) / denom : 0.0;
      d[j] = d[j - 1] * (1.0 - alpha) + d[j] * alpha;
    }
  return d[kCubic];
}

/// `count` points at uniform parameter spacing over the full range (count >= 2).
inline std::vector<Point> sample_uniform(const BSplineCurve& curve, std::size_t count) {
  if (count < 2) throw Error("need at least two samples");
  std::vector<Point> pts(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = i + 1 == count ? curve.t_max
                                    : curve.t_min + (curve.t_max - curve.t_min) * static_cast<double>(i) / (count - 1);
    pts[i] = evaluate(curve, t);
  }
  return pts;
}

namespace detail {

// Banded least squares by Givens rotations: rows are absorbed one at a time into an upper
// triangular factor of bandwidth 4, so memory and work are linear in the sample count.
class BandedLeastSquares {
 public:
  BandedLeastSquares(std::size_t columns, int dims) : r_(columns), z_(columns), dims_(dims) {}

  void add_row(std::size_t first_col, std::array<double, 4> h, Point rhs) {
    std::array<double, 3> y{rhs.x, rhs.y, rhs.z};
    for (int i = 0; i < 4; ++i) {
      const double piv = h[i];
      if (piv == 0.0) continue;
      const std::size_t col = first_col + i;
      auto& row = r_[col];
      const double ww = std::hypot(row[0], piv);
      const double c = row[0] / ww;
      const double s = piv / ww;
      row[0] = ww;
      for (int d = 0; d < dims_; ++d) {
        const double zi = z_[col][d];
        z_[col][d] = c * zi + s * y[d];
        y[d] = -s * zi + c * y[d];
      }
      for (int l = i + 1; l < 4; ++l) {
        const double ri = row[l - i];
        row[l - i] = c * ri + s * h[l];
        h[l] = -s * ri + c * h[l];
      }
    }
  }

  std::vector<Point> solve() const {
    const std::size_t n = r_.size();
    double scale = 0.0;
    for (const auto& row : r_) scale = std::max(scale, std::abs(row[0]));
    std::vector<std::array<double, 3>> x(n, {0.0, 0.0, 0.0});
    for (std::size_t jj = n; jj-- > 0;) {
      if (!(std::abs(r_[jj][0]) > 1e-12 * scale))
        throw Error("rank-deficient collocation matrix (Schoenberg-Whitney violated)");
      for (int d = 0; d < dims_; ++d) {
        double acc = z_[jj][d];
        for (std::size_t l = 1; l < 4 && jj + l < n; ++l) acc -= r_[jj][l] * x[jj + l][d];
        x[jj][d] = acc / r_[jj][0];
      }
    }
    std::vector<Point> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = {x[j][0], x[j][1], dims_ == 3 ? x[j][2] : 0.0};
    return out;
  }

 private:
  std::vector<std::array<double, 4>> r_;
  std::vector<std::array<double, 3>> z_;
  int dims_;
};

}  // namespace detail

/// Cubic B-spline on `knots` minimizing the squared distance to `pc` at its parameters.
inline BSplineCurve fit_with_knots(const ParameterizedChain& pc, std::vector<double> knots) {
  if (pc.t.size() != pc.coords.size()) throw Error("parameter and coordinate counts differ");
  BSplineCurve curve;
  curve.dim = pc.dim;
  curve.knots = std::move(knots);
  curve.t_min = curve.knots.front();
  curve.t_max = curve.knots.back();
  const std::size_t n_ctrl = curve.knots.size() - kCubic - 1;
  detail::BandedLeastSquares lsq(n_ctrl, pc.dim);
  for (std::size_t i = 0; i < pc.t.size(); ++i) {
    const std::size_t span = find_span(curve.knots, pc.t[i]);
    lsq.add_row(span - kCubic, basis_functions(curve.knots, span, pc.t[i]), pc.coords[i]);
  }
  curve.control_points = lsq.solve();
  return curve;
}

/// Least-squares cubic fit with `k` index-equidistant interior knots.
inline BSplineCurve fit(const ParameterizedChain& pc, int k) { return fit_with_knots(pc, place_knots(pc.t, k)); }

/// Sum of squared residuals of `curve` against `pc`.
inline double squared_residual(const BSplineCurve& curve, const ParameterizedChain& pc) {
  double acc = 0.0;
  for (std::size_t i = 0; i < pc.t.size(); ++i) {
    const Point d = evaluate(curve, pc.t[i]) - pc.coords[i];
    acc += dot(d, d);
  }
  return acc;
}

/// Adds z from `depth` to every chain sample, keeping the 2D parameter. Invalid depths are
/// interpolated linearly in t between the nearest valid samples, clamped beyond the last one.
/// Empty when no sample has valid depth.
inline std::optional<ParameterizedChain> lift_to_3d(const ParameterizedChain& pc2d, const DepthMap& depth) {
  ParameterizedChain pc = pc2d;
  pc.dim = 3;
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < pc.coords.size(); ++i) {
    const Pixel px{static_cast<int>(std::lround(pc.coords[i].x)), static_cast<int>(std::lround(pc.coords[i].y))};
    if (depth.is_valid(px)) {
      pc.coords[i].z = depth.depth[px];
      valid.push_back(i);
    }
  }
  if (valid.empty()) return std::nullopt;
  std::size_t v = 0;  // first valid index >= i
  for (std::size_t i = 0; i < pc.coords.size(); ++i) {
    while (v < valid.size() && valid[v] < i) ++v;
    if (v < valid.size() && valid[v] == i) continue;
    if (v == 0) {
      pc.coords[i].z = pc.coords[valid.front()].z;
    } else if (v == valid.size()) {
      pc.coords[i].z = pc.coords[valid.back()].z;
    } else {
      const std::size_t a = valid[v - 1];
      const std::size_t b = valid[v];
      const double w = (pc.t[i] - pc.t[a]) / (pc.t[b] - pc.t[a]);
      pc.coords[i].z = (1.0 - w) * pc.coords[a].z + w * pc.coords[b].z;
    }
  }
  return pc;
}

inline std::optional<ParameterizedChain> lift_to_3d(const SegmentChain& chain, const DepthMap& depth) {
  return lift_to_3d(parameterize(chain), depth);
}

}  // namespace cablefit

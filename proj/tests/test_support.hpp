#pragma once

// Test-only helpers and independent reference implementations ("oracles"). Nothing here calls
// the library routine it is used to check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cablefit/cablefit.hpp"

namespace cablefit::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::path(CABLEFIT_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Mask from text rows: '#' is occupied, anything else empty.
inline BinaryMask mask_from_rows(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m(x, y) = rows[y][x] == '#';
  return m;
}

inline BinaryMask mask_from_pixels(int w, int h, const std::vector<Pixel>& px) {
  BinaryMask m(w, h);
  for (auto p : px) m.set(p);
  return m;
}

inline std::set<Pixel> as_set(const std::vector<Pixel>& v) { return {v.begin(), v.end()}; }

inline int count_neighbors(const std::set<Pixel>& s, Pixel p) {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      if ((dx || dy) && s.count({p.x + dx, p.y + dy})) ++n;
  return n;
}

// ---- morphology: direct definition with zero padding ----------------------------------------

inline BinaryMask brute_morph(const BinaryMask& m, int kernel, bool erosion) {
  const int r = kernel / 2;
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool all = true, any = false;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const bool v = m.occupied(x + dx, y + dy);
          all = all && v;
          any = any || v;
        }
      out(x, y) = erosion ? all : any;
    }
  return out;
}

inline BinaryMask brute_open(const BinaryMask& m, int kernel = 3) {
  return brute_morph(brute_morph(m, kernel, true), kernel, false);
}

// ---- nearest neighbor and aligned distance ----------------------------------------------------

inline double brute_mmd(const std::vector<Point>& x, const std::vector<Point>& y) {
  double acc = 0.0;
  for (const auto& p : x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : y) best = std::min(best, std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) +
                                                             (p.z - q.z) * (p.z - q.z)));
    acc += best;
  }
  return acc / static_cast<double>(x.size());
}

inline std::vector<double> brute_cumulative(const std::vector<Point>& pts) {
  std::vector<double> d(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dx = pts[i].x - pts[i - 1].x, dy = pts[i].y - pts[i - 1].y, dz = pts[i].z - pts[i - 1].z;
    d[i] = d[i - 1] + std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  for (auto& v : d) v /= d.back();
  return d;
}

// min over w in [0, 1] of |p - ((1 - w) a + w b)| by a dense grid, refined by golden section
// inside the best grid cell.
inline double grid_segment_distance(const Point& p, const Point& a, const Point& b) {
  auto f = [&](double w) {
    const double x = (1 - w) * a.x + w * b.x - p.x, y = (1 - w) * a.y + w * b.y - p.y, z = (1 - w) * a.z + w * b.z - p.z;
    return std::sqrt(x * x + y * y + z * z);
  };
  const int n = 2000;
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (f(static_cast<double>(i) / n) < f(static_cast<double>(best) / n)) best = i;
  double lo = std::max(0.0, (best - 1.0) / n), hi = std::min(1.0, (best + 1.0) / n);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 100; ++it) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (f(m1) < f(m2)) hi = m2;
    else lo = m1;
  }
  return std::min({f(0.0), f(1.0), f(static_cast<double>(best) / n), f(0.5 * (lo + hi))});
}

// F(X, Y) with a linear scan for the aligned segment.
inline double brute_F(const std::vector<Point>& x, const std::vector<Point>& y) {
  const auto dx = brute_cumulative(x), dy = brute_cumulative(y);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t k = y.size() - 2;
    if (i + 1 < x.size())
      for (std::size_t j = 0; j + 1 < y.size(); ++j)
        if (dy[j] <= dx[i] && dx[i] <= dy[j + 1]) {
          k = j;
          break;
        }
    acc += grid_segment_distance(x[i], y[k], y[k + 1]);
  }
  return acc / static_cast<double>(x.size());
}

inline double brute_l3(const std::vector<Point>& a, const std::vector<Point>& b) {
  return 0.5 * (brute_F(a, b) + brute_F(b, a));
}

// ---- B-spline basis by the Cox-de Boor recursion and a dense least-squares solve ---------------

inline double cox_de_boor(const std::vector<double>& u, int i, int p, double t) {
  if (p == 0) {
    const bool last_span = t == u.back() && u[i] < u[i + 1] && u[i + 1] == u.back();
    return (u[i] <= t && t < u[i + 1]) || last_span ? 1.0 : 0.0;
  }
  double v = 0.0;
  if (u[i + p] > u[i]) v += (t - u[i]) / (u[i + p] - u[i]) * cox_de_boor(u, i, p - 1, t);
  if (u[i + p + 1] > u[i + 1]) v += (u[i + p + 1] - t) / (u[i + p + 1] - u[i + 1]) * cox_de_boor(u, i + 1, p - 1, t);
  return v;
}

inline Point oracle_evaluate(const BSplineCurve& c, double t) {
  Point acc;
  for (std::size_t i = 0; i < c.control_points.size(); ++i)
    acc += c.control_points[i] * cox_de_boor(c.knots, static_cast<int>(i), 3, t);
  return acc;
}

/// Dense QR least squares on the full collocation matrix; returns control points.
inline std::vector<Point> dense_fit(const std::vector<double>& knots, const std::vector<double>& t,
                                    const std::vector<Point>& pts) {
  const auto nc = static_cast<Eigen::Index>(knots.size() - 4);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(t.size()), nc);
  Eigen::MatrixXd b(static_cast<Eigen::Index>(t.size()), 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (Eigen::Index j = 0; j < nc; ++j) a(i, j) = cox_de_boor(knots, static_cast<int>(j), 3, t[i]);
    b(i, 0) = pts[i].x;
    b(i, 1) = pts[i].y;
    b(i, 2) = pts[i].z;
  }
  const Eigen::MatrixXd x = a.colPivHouseholderQr().solve(b);
  std::vector<Point> out(static_cast<std::size_t>(nc));
  for (Eigen::Index j = 0; j < nc; ++j) out[j] = {x(j, 0), x(j, 1), x(j, 2)};
  return out;
}

// ---- exhaustive chaining ----------------------------------------------------------------------

inline bool brute_acyclic(const std::vector<Connection>& chosen, std::size_t segments) {
  std::vector<std::size_t> comp(segments);
  for (std::size_t s = 0; s < segments; ++s) comp[s] = s;
  for (const auto& c : chosen) {
    const std::size_t from = comp[c.a.segment], to = comp[c.b.segment];
    if (from == to) return false;
    for (auto& v : comp)
      if (v == from) v = to;
  }
  return true;
}

/// Minimum total cost over every endpoint-disjoint, acyclic subset of `pairs` with exactly
/// `size` connections; +inf when none exists.
inline double exhaustive_min_total(const std::vector<Connection>& pairs, std::size_t segments, std::size_t size) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> used(2 * segments, 0);
  std::vector<Connection> chosen;
  std::function<void(std::size_t, double)> rec = [&](std::size_t from, double cost) {
    if (chosen.size() == size) {
      best = std::min(best, cost);
      return;
    }
    for (std::size_t i = from; i < pairs.size(); ++i) {
      const auto& c = pairs[i];
      if (used[c.a.slot()] || used[c.b.slot()]) continue;
      chosen.push_back(c);
      if (brute_acyclic(chosen, segments)) {
        used[c.a.slot()] = used[c.b.slot()] = 1;
        rec(i + 1, cost + c.cost);
        used[c.a.slot()] = used[c.b.slot()] = 0;
      }
      chosen.pop_back();
    }
  };
  rec(0, 0.0);
  return best;
}

}  // namespace cablefit::testing

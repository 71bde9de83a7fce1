#pragma once

#include <string>
#include <vector>

#include "cablefit/types.hpp"

namespace cablefit {

inline constexpr int kCubic = 3;

/// Clamped cubic B-spline in 2D (z unused) or 3D.
struct BSplineCurve {
  int degree = kCubic;
  int dim = 2;
  std::vector<double> knots;
  std::vector<Point> control_points;
  double t_min = 0.0;
  double t_max = 0.0;

  friend bool operator==(const BSplineCurve&, const BSplineCurve&) = default;
};

/// Empty string when `c` is a well-formed clamped cubic; otherwise the first violation found.
inline std::string check_curve(const BSplineCurve& c) {
  if (c.degree != kCubic) return "degree must be 3";
  if (c.dim != 2 && c.dim != 3) return "dimension must be 2 or 3";
  const std::size_t order = static_cast<std::size_t>(c.degree) + 1;
  if (c.knots.size() < 2 * order) return "too few knots";
  if (c.control_points.size() + order != c.knots.size()) return "control point count != knots - degree - 1";
  for (std::size_t i = 1; i < c.knots.size(); ++i)
    if (!(c.knots[i] >= c.knots[i - 1])) return "knots must be non-decreasing";
  for (std::size_t i = 1; i < order; ++i) {
    if (c.knots[i] != c.knots[0]) return "first knot must have multiplicity degree+1";
    if (c.knots[c.knots.size() - 1 - i] != c.knots.back()) return "last knot must have multiplicity degree+1";
  }
  if (c.knots[order] == c.knots[0] && c.knots.size() > 2 * order) return "interior knot coincides with t_min";
  if (c.knots[c.knots.size() - order - 1] == c.knots.back() && c.knots.size() > 2 * order)
    return "interior knot coincides with t_max";
  if (!(c.knots.front() < c.knots.back())) return "empty parameter range";
  if (c.t_min != c.knots.front() || c.t_max != c.knots.back()) return "t_range must match the clamped knot ends";
  return {};
}

inline void validate_curve(const BSplineCurve& c) {
  if (auto why = check_curve(c); !why.empty()) throw Error("invalid curve: " + why);
}

}  // namespace cablefit

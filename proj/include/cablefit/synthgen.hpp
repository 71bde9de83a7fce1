#pragma once

// Synthetic cable scenes: reference curves evolving over time, rasterized into masks (and
// optionally depth) with occlusions and speckle noise. Output is a pure function of
// (spec, frame, seed).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cablefit/curve.hpp"
#include "cablefit/metrics.hpp"
#include "cablefit/spline.hpp"
#include "cablefit/types.hpp"

namespace cablefit::synth {

using Polygon = std::vector<Point>;

struct CableSpec {
  std::vector<Polygon> keyframes;  // control polygons, interpolated evenly across the sequence
  double step_bound = 0.0;         // > 0: random walk from keyframes[0], max displacement per frame
};

struct Occlusion {
  double x = 0, y = 0, w = 0, h = 0;
  int first_frame = 0;
  int last_frame = -1;  // inclusive; negative means the last frame

  bool active(int frame) const { return frame >= first_frame && (last_frame < 0 || frame <= last_frame); }
  bool covers(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
};

enum class DepthMode { none, plane, ramp, from_curve };

struct DepthSpec {
  DepthMode mode = DepthMode::none;
  double z0 = 500.0;  // plane depth, or ramp value at x = 0
  double z1 = 500.0;  // ramp value at x = width - 1
};

struct ScenarioSpec {
  int frames = 1;
  int width = 640;
  int height = 480;
  double cable_width = 5.0;
  double margin = 10.0;  // random walks reflect off this band along the image border
  int speckles = 0;      // isolated noise pixels per frame
  std::vector<CableSpec> cables;
  std::vector<Occlusion> occlusions;
  DepthSpec depth;
  std::uint64_t seed = 1;  // default seed for command-line use

  void validate() const {
    if (frames < 1) throw Error("scenario needs at least one frame");
    if (width < kMinMaskSide || height < kMinMaskSide) throw Error("scenario image below 3x3");
    if (cable_width < 3.0) throw Error("cable width must be >= 3 px");
    if (cables.empty()) throw Error("scenario needs at least one cable");
    for (const auto& c : cables) {
      if (c.keyframes.empty()) throw Error("cable needs at least one control polygon");
      if (c.step_bound < 0.0) throw Error("step bound must be non-negative");
      for (const auto& poly : c.keyframes) {
        if (poly.size() < 4) throw Error("control polygon needs at least four points");
        if (poly.size() != c.keyframes.front().size()) throw Error("keyframes must share a point count");
        for (const auto& p : poly)
          if (p.x < 0 || p.y < 0 || p.x > width - 1 || p.y > height - 1)
            throw Error("control point outside the image");
      }
    }
    for (const auto& o : occlusions)
      if (o.w < 0 || o.h < 0) throw Error("occlusion extent must be non-negative");
  }
};

/// Clamped cubic B-spline with uniform interior knots over `poly`; parameter range [0, n - 3].
inline BSplineCurve reference_curve(const Polygon& poly, int dim) {
  if (poly.size() < 4) throw Error("control polygon needs at least four points");
  BSplineCurve c;
  c.dim = dim;
  const int n = static_cast<int>(poly.size());
  c.knots.assign(4, 0.0);
  for (int i = 1; i <= n - 4; ++i) c.knots.push_back(i);
  c.knots.insert(c.knots.end(), 4, static_cast<double>(n - 3));
  c.control_points = poly;
  c.t_min = 0.0;
  c.t_max = n - 3;
  return c;
}

namespace detail {

// Uniform double in [0, 1) with a fixed bit recipe, identical on every standard library.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Polygon lerp(const Polygon& a, const Polygon& b, double s) {
  Polygon out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * (1.0 - s) + b[i] * s;
  return out;
}

}  // namespace detail

/// Control polygons of every cable for every frame: result[frame][cable].
inline std::vector<std::vector<Polygon>> evolve(const ScenarioSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<std::vector<Polygon>> out(spec.frames, std::vector<Polygon>(spec.cables.size()));
  for (std::size_t ci = 0; ci < spec.cables.size(); ++ci) {
    const auto& cable = spec.cables[ci];
    if (cable.step_bound > 0.0) {
      std::mt19937_64 rng(detail::mix(seed, ci));
      Polygon poly = cable.keyframes.front();
      std::vector<Point> vel(poly.size());
      const double lo_x = spec.margin, hi_x = spec.width - 1 - spec.margin;
      const double lo_y = spec.margin, hi_y = spec.height - 1 - spec.margin;
      for (int f = 0; f < spec.frames; ++f) {
        if (f > 0) {
          for (std::size_t j = 0; j < poly.size(); ++j) {
            const double ang = 2.0 * 3.14159265358979323846 * detail::unit(rng);
            const double rad = cable.step_bound * std::sqrt(detail::unit(rng));
            vel[j] = vel[j] * 0.8 + Point{rad * std::cos(ang), rad * std::sin(ang), 0.0} * 0.6;
            const double speed = std::hypot(vel[j].x, vel[j].y);
            if (speed > cable.step_bound) vel[j] *= cable.step_bound / speed;
            Point& p = poly[j];
            p.x += vel[j].x;
            p.y += vel[j].y;
            if (p.x < lo_x) { p.x = std::min(2 * lo_x - p.x, hi_x); vel[j].x = -vel[j].x; }
            if (p.x > hi_x) { p.x = std::max(2 * hi_x - p.x, lo_x); vel[j].x = -vel[j].x; }
            if (p.y < lo_y) { p.y = std::min(2 * lo_y - p.y, hi_y); vel[j].y = -vel[j].y; }
            if (p.y > hi_y) { p.y = std::max(2 * hi_y - p.y, lo_y); vel[j].y = -vel[j].y; }
          }
        }
        out[f][ci] = poly;
      }
    } else {
      const auto& keys = cable.keyframes;
      for (int f = 0; f < spec.frames; ++f) {
        if (keys.size() == 1 || spec.frames == 1) {
          out[f][ci] = keys.front();
          continue;
        }
        const double s = static_cast<double>(f) * (keys.size() - 1) / (spec.frames - 1);
        const auto i = std::min(static_cast<std::size_t>(s), keys.size() - 2);
        out[f][ci] = detail::lerp(keys[i], keys[i + 1], s - static_cast<double>(i));
      }
    }
  }
  return out;
}

/// Curve points at most `spacing` apart, in order.
inline std::vector<Point> dense_samples(const BSplineCurve& curve, double spacing) {
  std::vector<Point> out{evaluate(curve, curve.t_min)};
  const int base = 256;
  double t_prev = curve.t_min;
  for (int i = 1; i <= base; ++i) {
    const double t_next = i == base ? curve.t_max : curve.t_min + (curve.t_max - curve.t_min) * i / base;
    const Point end = evaluate(curve, t_next);
    const auto pieces = static_cast<int>(std::ceil(distance(out.back(), end) / spacing * 1.5)) + 1;
    for (int s = 1; s <= pieces; ++s) out.push_back(evaluate(curve, t_prev + (t_next - t_prev) * s / pieces));
    t_prev = t_next;
  }
  return out;
}

struct Frame {
  BinaryMask mask;
  std::optional<DepthMap> depth;
  std::vector<BSplineCurve> reference;  // one per cable
  std::vector<DiscretizedCurve> truth;  // reference curves discretized for L3
  int truth_dim = 2;                    // 3 whenever a depth map is rendered
};

inline constexpr std::size_t kTruthSamples = 1000;

/// Renders one frame from precomputed control polygons.
inline Frame render_polygons(const ScenarioSpec& spec, int frame_index, const std::vector<Polygon>& polys,
                             std::uint64_t seed) {
  const int dim = spec.depth.mode == DepthMode::from_curve ? 3 : 2;
  Frame fr;
  fr.mask = BinaryMask(spec.width, spec.height);
  Grid<double> zbuf(spec.width, spec.height, std::numeric_limits<double>::infinity());
  const double r = spec.cable_width / 2.0;
  const int ir = static_cast<int>(std::ceil(r));

  for (const auto& poly : polys) {
    fr.reference.push_back(reference_curve(poly, dim));
    const auto& curve = fr.reference.back();
    for (const auto& s : dense_samples(curve, 0.5)) {
      const int cx = static_cast<int>(std::lround(s.x));
      const int cy = static_cast<int>(std::lround(s.y));
      for (int y = cy - ir; y <= cy + ir; ++y)
        for (int x = cx - ir; x <= cx + ir; ++x) {
          if (!fr.mask.contains(x, y)) continue;
          const double dx = x - s.x, dy = y - s.y;
          if (dx * dx + dy * dy > r * r) continue;
          fr.mask(x, y) = 1;
          zbuf(x, y) = std::min(zbuf(x, y), s.z);
        }
    }
    auto pts = sample_uniform(curve, kTruthSamples);
    for (auto& p : pts) {
      if (spec.depth.mode == DepthMode::plane) p.z = spec.depth.z0;
      if (spec.depth.mode == DepthMode::ramp)
        p.z = spec.depth.z0 + (spec.depth.z1 - spec.depth.z0) * p.x / std::max(1, spec.width - 1);
    }
    fr.truth.push_back(discretized(std::move(pts)));
  }
  fr.truth_dim = spec.depth.mode == DepthMode::none ? 2 : 3;

  std::mt19937_64 rng(detail::mix(seed, 1000003ULL + static_cast<std::uint64_t>(frame_index)));
  for (int i = 0; i < spec.speckles; ++i) {
    const int x = std::min(spec.width - 1, static_cast<int>(detail::unit(rng) * spec.width));
    const int y = std::min(spec.height - 1, static_cast<int>(detail::unit(rng) * spec.height));
    fr.mask(x, y) = 1;
  }

  for (const auto& o : spec.occlusions) {
    if (!o.active(frame_index)) continue;
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x)
        if (o.covers(x, y)) fr.mask(x, y) = 0;
  }

  if (spec.depth.mode != DepthMode::none) {
    DepthMap d(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        if (!fr.mask(x, y)) continue;
        switch (spec.depth.mode) {
          case DepthMode::plane: d.set({x, y}, spec.depth.z0); break;
          case DepthMode::ramp:
            d.set({x, y}, spec.depth.z0 + (spec.depth.z1 - spec.depth.z0) * x / std::max(1, spec.width - 1));
            break;
          case DepthMode::from_curve:
            if (std::isfinite(zbuf(x, y))) d.set({x, y}, zbuf(x, y));
            break;
          case DepthMode::none: break;
        }
      }
    fr.depth = std::move(d);
  }
  return fr;
}

/// Renders frame `frame_index` of the scenario.
inline Frame render_frame(const ScenarioSpec& spec, int frame_index, std::uint64_t seed) {
  spec.validate();
  if (frame_index < 0 || frame_index >= spec.frames) throw Error("frame index out of range");
  return render_polygons(spec, frame_index, evolve(spec, seed)[frame_index], seed);
}

/// Every frame of the scenario, in order.
inline std::vector<Frame> render_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  const auto polys = evolve(spec, seed);
  std::vector<Frame> frames;
  frames.reserve(polys.size());
  for (int f = 0; f < spec.frames; ++f) frames.push_back(render_polygons(spec, f, polys[f], seed));
  return frames;
}

// ---- JSON scenario files -------------------------------------------------------------------

inline Polygon polygon_from_json(const nlohmann::json& j) {
  Polygon p;
  for (const auto& pt : j) {
    if (pt.size() < 2 || pt.size() > 3) throw Error("control points need 2 or 3 coordinates");
    p.push_back({pt.at(0).get<double>(), pt.at(1).get<double>(), pt.size() == 3 ? pt.at(2).get<double>() : 0.0});
  }
  return p;
}

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  try {
    ScenarioSpec s;
    s.frames = j.value("frames", 1);
    s.width = j.value("width", 640);
    s.height = j.value("height", 480);
    s.cable_width = j.value("cable_width", 5.0);
    s.margin = j.value("margin", 10.0);
    s.speckles = j.value("speckles", 0);
    s.seed = j.value("seed", std::uint64_t{1});
    for (const auto& cj : j.at("cables")) {
      CableSpec c;
      if (cj.contains("keyframes")) {
        for (const auto& k : cj.at("keyframes")) c.keyframes.push_back(polygon_from_json(k));
      } else {
        c.keyframes.push_back(polygon_from_json(cj.at("control_points")));
      }
      c.step_bound = cj.value("step_bound", 0.0);
      s.cables.push_back(std::move(c));
    }
    if (j.contains("occlusions"))
      for (const auto& oj : j.at("occlusions"))
        s.occlusions.push_back({oj.at("x").get<double>(), oj.at("y").get<double>(), oj.at("w").get<double>(),
                                oj.at("h").get<double>(), oj.value("first_frame", 0), oj.value("last_frame", -1)});
    if (j.contains("depth")) {
      const auto& dj = j.at("depth");
      const auto mode = dj.value("mode", std::string("none"));
      if (mode == "none") s.depth.mode = DepthMode::none;
      else if (mode == "plane") s.depth.mode = DepthMode::plane;
      else if (mode == "ramp") s.depth.mode = DepthMode::ramp;
      else if (mode == "from_curve") s.depth.mode = DepthMode::from_curve;
      else throw Error("unknown depth mode '" + mode + "'");
      s.depth.z0 = dj.value("z0", dj.value("z", 500.0));
      s.depth.z1 = dj.value("z1", s.depth.z0);
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed scenario: ") + e.what());
  }
}

/// Ground-truth polylines of one frame: {"instances": [{"points": [[x, y(, z)], ...]}]}.
inline nlohmann::json truth_to_json(const Frame& fr) {
  nlohmann::json inst = nlohmann::json::array();
  for (std::size_t i = 0; i < fr.truth.size(); ++i) {
    const bool is3d = fr.truth_dim == 3;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : fr.truth[i].points) pts.push_back(is3d ? nlohmann::json{p.x, p.y, p.z} : nlohmann::json{p.x, p.y});
    inst.push_back({{"points", pts}});
  }
  return {{"instances", inst}};
}

}  // namespace cablefit::synth

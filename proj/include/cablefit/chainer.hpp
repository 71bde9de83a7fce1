#pragma once

// Segment filtering and greedy endpoint pairing into ordered chains, one chain per cable instance.
//
// Connection cost between two endpoints a, b of different segments:
//   J = m * |a - b| + (1 - m) * J_o,   J_o = |pi - phi_a - phi_b|
// with phi_i = pi/2 - angle(tangent_i, direction from i toward the other endpoint). Two
// fragments of one straight cable facing each other give phi = pi/2 on both sides and J_o = 0;
// tangents pointing away from each other give the maximum J_o = 2 pi.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "cablefit/types.hpp"
#include "cablefit/walker.hpp"

namespace cablefit {

enum class End : int { head = 0, tail = 1 };

inline constexpr End opposite(End e) { return e == End::head ? End::tail : End::head; }

struct ChainerParams {
  double m = 0.05;     // distance/orientation mixing factor
  int p = 10;          // minimum segment length, pixels (point count)
  double j_th = 10.0;  // connections need J < j_th
  int w = 10;          // tangent estimation window, pixels

  void validate() const {
    if (!(m >= 0.0 && m <= 1.0)) throw Error("m must lie in [0, 1]");
    if (p < 1) throw Error("p must be >= 1");
    if (!(j_th > 0.0)) throw Error("J_th must be > 0");
    if (w < 2) throw Error("w must be >= 2");
  }
};

struct EndpointDescriptor {
  std::size_t segment_id = 0;
  End end = End::head;
  Pixel position;
  Point tangent;  // unit, pointing out of the segment
};

/// Keeps paths with at least `p` points, order preserved.
inline std::vector<PixelPath> filter_short(const std::vector<PixelPath>& paths, int p) {
  std::vector<PixelPath> out;
  for (const auto& path : paths)
    if (static_cast<int>(path.size()) >= p) out.push_back(path);
  return out;
}

/// Unit vector from the pixel `w - 1` steps inside the path (clamped to the far end) to the endpoint.
inline Point endpoint_tangent(const PixelPath& path, End end, int w) {
  if (path.size() < 2) throw Error("endpoint tangent needs a path of at least two points");
  if (w < 2) throw Error("tangent window must be >= 2");
  const std::size_t reach = std::min<std::size_t>(static_cast<std::size_t>(w - 1), path.size() - 1);
  const Pixel tip = end == End::head ? path.points.front() : path.points.back();
  const Pixel inner = end == End::head ? path.points[reach] : path.points[path.size() - 1 - reach];
  Point v = to_point(tip) - to_point(inner);
  return v * (1.0 / norm(v));
}

inline EndpointDescriptor describe_endpoint(const PixelPath& path, std::size_t id, End end, int w) {
  return {id, end, end == End::head ? path.front() : path.back(), endpoint_tangent(path, end, w)};
}

/// Orientation term J_o in radians, in [0, 2 pi].
inline double orientation_cost(const EndpointDescriptor& a, const EndpointDescriptor& b) {
  const Point d = to_point(b.position) - to_point(a.position);
  const double len = norm(d);
  if (len == 0.0) return 0.0;
  const Point dir = d * (1.0 / len);
  auto angle = [](const Point& u, const Point& v) { return std::acos(std::clamp(dot(u, v), -1.0, 1.0)); };
  const double phi_a = std::numbers::pi / 2 - angle(a.tangent, dir);
  const double phi_b = std::numbers::pi / 2 - angle(b.tangent, dir * -1.0);
  return std::abs(std::numbers::pi - phi_a - phi_b);
}

inline double pair_cost(const EndpointDescriptor& a, const EndpointDescriptor& b, double m) {
  if (a.segment_id == b.segment_id) throw Error("endpoints of the same segment cannot be paired");
  const double jd = distance(to_point(a.position), to_point(b.position));
  return m * jd + (1.0 - m) * orientation_cost(a, b);
}

/// Endpoint reference: segment index and which end.
struct EndRef {
  std::size_t segment = 0;
  End end = End::head;

  std::size_t slot() const { return 2 * segment + static_cast<std::size_t>(end); }
  friend constexpr bool operator==(const EndRef&, const EndRef&) = default;
  friend constexpr auto operator<=>(const EndRef& a, const EndRef& b) {
    if (auto c = a.segment <=> b.segment; c != 0) return c;
    return static_cast<int>(a.end) <=> static_cast<int>(b.end);
  }
};

struct Connection {
  EndRef a;  // a < b
  EndRef b;
  double cost = 0.0;
};

/// All pairs between different segments with cost < j_th, sorted by (cost, a, b).
inline std::vector<Connection> admissible_pairs(const std::vector<EndpointDescriptor>& ends, const ChainerParams& params) {
  std::vector<Connection> pairs;
  for (std::size_t i = 0; i < ends.size(); ++i)
    for (std::size_t j = i + 1; j < ends.size(); ++j) {
      if (ends[i].segment_id == ends[j].segment_id) continue;
      const double c = pair_cost(ends[i], ends[j], params.m);
      if (!(c < params.j_th)) continue;
      EndRef a{ends[i].segment_id, ends[i].end};
      EndRef b{ends[j].segment_id, ends[j].end};
      if (b < a) std::swap(a, b);
      pairs.push_back({a, b, c});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Connection& x, const Connection& y) {
    if (x.cost != y.cost) return x.cost < y.cost;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return pairs;
}

inline std::vector<EndpointDescriptor> describe_endpoints(const std::vector<PixelPath>& paths, int w) {
  std::vector<EndpointDescriptor> ends;
  ends.reserve(2 * paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].size() < 2) continue;  // no tangent; stays a chain of its own
    ends.push_back(describe_endpoint(paths[i], i, End::head, w));
    ends.push_back(describe_endpoint(paths[i], i, End::tail, w));
  }
  return ends;
}

/// Greedy commit loop over pairs sorted by cost: cheapest first, skipping pairs that reuse an
/// endpoint or would close a loop. Returns commits in the order made.
inline std::vector<Connection> greedy_commit(const std::vector<Connection>& sorted_pairs, std::size_t segments) {
  std::vector<std::uint8_t> used(2 * segments, 0);
  std::vector<std::size_t> parent(segments);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<Connection> committed;
  for (const auto& c : sorted_pairs) {
    if (committed.size() + 1 >= segments) break;  // s segments admit at most s - 1 joins
    if (used[c.a.slot()] || used[c.b.slot()]) continue;
    const auto ra = find(c.a.segment);
    const auto rb = find(c.b.segment);
    if (ra == rb) continue;
    parent[ra] = rb;
    used[c.a.slot()] = used[c.b.slot()] = 1;
    committed.push_back(c);
  }
  return committed;
}

inline std::vector<Connection> greedy_connections(const std::vector<PixelPath>& paths, const ChainerParams& params) {
  params.validate();
  return greedy_commit(admissible_pairs(describe_endpoints(paths, params.w), params), paths.size());
}

struct ChainLink {
  PixelPath path;
  bool reversed = false;
  std::size_t source = 0;  // index into the chainer's input list

  std::vector<Pixel> oriented_points() const {
    auto pts = path.points;
    if (reversed) std::reverse(pts.begin(), pts.end());
    return pts;
  }
  Pixel entry() const { return reversed ? path.back() : path.front(); }
  Pixel exit() const { return reversed ? path.front() : path.back(); }
};

/// Ordered segments of one cable instance, joined exit-to-entry.
struct SegmentChain {
  std::vector<ChainLink> segments;
  std::vector<double> gap_distances;  // size() == segments.size() - 1

  Pixel first_pixel() const { return segments.front().entry(); }
  Pixel last_pixel() const { return segments.back().exit(); }
  std::size_t pixel_count() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += s.path.size();
    return n;
  }
};

inline SegmentChain reversed(const SegmentChain& chain) {
  SegmentChain r;
  for (auto it = chain.segments.rbegin(); it != chain.segments.rend(); ++it) {
    auto link = *it;
    link.reversed = !link.reversed;
    r.segments.push_back(std::move(link));
  }
  r.gap_distances.assign(chain.gap_distances.rbegin(), chain.gap_distances.rend());
  return r;
}

/// Builds chains from a set of committed connections (each endpoint used at most once, acyclic).
inline std::vector<SegmentChain> assemble_chains(const std::vector<PixelPath>& paths,
                                                 const std::vector<Connection>& connections) {
  std::vector<std::optional<EndRef>> partner(2 * paths.size());
  for (const auto& c : connections) {
    partner[c.a.slot()] = c.b;
    partner[c.b.slot()] = c.a;
  }
  std::vector<std::uint8_t> placed(paths.size(), 0);
  std::vector<SegmentChain> chains;
  for (std::size_t s = 0; s < paths.size(); ++s) {
    if (placed[s]) continue;
    const bool head_free = !partner[EndRef{s, End::head}.slot()];
    const bool tail_free = !partner[EndRef{s, End::tail}.slot()];
    if (!head_free && !tail_free) continue;  // interior of a chain, reached from one of its free ends
    SegmentChain chain;
    EndRef entry{s, head_free ? End::head : End::tail};
    while (true) {
      placed[entry.segment] = 1;
      const auto& path = paths[entry.segment];
      chain.segments.push_back({path, entry.end == End::tail, entry.segment});
      const EndRef exit{entry.segment, opposite(entry.end)};
      const auto next = partner[exit.slot()];
      if (!next) break;
      const Pixel from = exit.end == End::head ? path.front() : path.back();
      const auto& np = paths[next->segment];
      const Pixel to = next->end == End::head ? np.front() : np.back();
      chain.gap_distances.push_back(distance(to_point(from), to_point(to)));
      entry = *next;
    }
    chains.push_back(std::move(chain));
  }
  for (std::size_t s = 0; s < paths.size(); ++s)
    if (!placed[s]) throw Error("connections contain a cycle");
  return chains;
}

/// Greedy chaining of already-filtered paths into cable instances.
inline std::vector<SegmentChain> chain_greedy(const std::vector<PixelPath>& paths, const ChainerParams& params) {
  return assemble_chains(paths, greedy_connections(paths, params));
}

}  // namespace cablefit

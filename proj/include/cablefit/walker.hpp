#pragma once

// Endpoint-to-endpoint traversal of a branch-free skeleton.

#include <algorithm>
#include <span>
#include <vector>

#include "cablefit/skeleton.hpp"
#include "cablefit/types.hpp"

namespace cablefit {

/// Ordered, simple, 8-connected pixel sequence.
struct PixelPath {
  std::vector<Pixel> points;
  double length_px = 0.0;

  std::size_t size() const { return points.size(); }
  Pixel front() const { return points.front(); }
  Pixel back() const { return points.back(); }

  friend bool operator==(const PixelPath&, const PixelPath&) = default;
};

inline double path_length(std::span<const Pixel> points) {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += step_length(points[i - 1], points[i]);
  return len;
}

inline PixelPath make_path(std::vector<Pixel> points) {
  PixelPath p{std::move(points), 0.0};
  p.length_px = path_length(p.points);
  return p;
}

inline PixelPath reversed(const PixelPath& path) {
  PixelPath r = path;
  std::reverse(r.points.begin(), r.points.end());
  return r;
}

/// Cuts a closed loop open: starts at the row-major smallest pixel and keeps stepping to an
/// unvisited neighbor, edge-adjacent before diagonal, then row-major. Throws unless the walk
/// covers `component` and returns next to its start.
inline PixelPath walk_cycle(std::span<const Pixel> component) {
  if (component.size() < 3) throw Error("a cycle needs at least three pixels");
  int x0 = component.front().x, y0 = component.front().y, x1 = x0, y1 = y0;
  for (auto p : component) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  // 0 = absent, 1 = unvisited, 2 = visited
  Grid<std::uint8_t> state(x1 - x0 + 1, y1 - y0 + 1, 0);
  auto local = [&](Pixel p) { return Pixel{p.x - x0, p.y - y0}; };
  for (auto p : component) state[local(p)] = 1;

  auto neighbors = [&](Pixel p) {
    std::vector<Pixel> out;
    for (auto d : kNeighborOffsets) {
      const Pixel q{p.x + d.x, p.y + d.y};
      if (state.contains(local(q)) && state[local(q)] != 0) out.push_back(q);
    }
    std::sort(out.begin(), out.end(), [&](Pixel a, Pixel b) {
      const bool da = a.x != p.x && a.y != p.y, db = b.x != p.x && b.y != p.y;
      if (da != db) return db;
      return a < b;
    });
    return out;
  };
  for (auto p : component)
    if (neighbors(p).size() < 2) throw Error("component is not a cycle: a pixel has fewer than two neighbors");

  const Pixel start = *std::min_element(component.begin(), component.end());
  std::vector<Pixel> points{start};
  state[local(start)] = 2;
  Pixel cur = neighbors(start).front();
  while (true) {
    points.push_back(cur);
    state[local(cur)] = 2;
    auto next = neighbors(cur);
    auto it = std::find_if(next.begin(), next.end(), [&](Pixel q) { return state[local(q)] == 1; });
    if (it == next.end()) break;
    cur = *it;
  }
  if (points.size() != component.size() || !are_8_neighbors(points.back(), start))
    throw Error("component is not a single cycle");
  return make_path(std::move(points));
}

/// Walks every segment of `skel`. Open segments start from endpoints in row-major order; pixels
/// left afterwards are closed loops (cut by walk_cycle) or isolated single pixels.
inline std::vector<PixelPath> walk_segments(const Skeleton& skel) {
  std::vector<PixelPath> paths;
  if (skel.pixels.empty()) return paths;
  Grid<std::uint8_t> visited(skel.width, skel.height, 0);

  auto unvisited_neighbor = [&](Pixel p, Pixel& out) {
    for (auto d : kNeighborOffsets) {
      const Pixel q{p.x + d.x, p.y + d.y};
      if (skel.contains(q) && !visited[q]) {
        out = q;
        return true;
      }
    }
    return false;
  };

  for (auto e : skel.endpoints) {
    if (visited[e]) continue;  // consumed as the far end of an earlier walk
    std::vector<Pixel> pts{e};
    visited[e] = 1;
    Pixel cur = e;
    Pixel next;
    while (unvisited_neighbor(cur, next)) {
      pts.push_back(next);
      visited[next] = 1;
      cur = next;
    }
    paths.push_back(make_path(std::move(pts)));
  }

  for (auto p : skel.pixels) {
    if (visited[p]) continue;
    std::vector<Pixel> component{p};
    visited[p] = 1;
    for (std::size_t i = 0; i < component.size(); ++i) {
      Pixel q;
      while (unvisited_neighbor(component[i], q)) {
        visited[q] = 1;
        component.push_back(q);
      }
    }
    if (component.size() == 1) {
      paths.push_back(make_path(std::move(component)));
    } else {
      paths.push_back(walk_cycle(component));
    }
  }
  return paths;
}

}  // namespace cablefit

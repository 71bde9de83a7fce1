#pragma once

// Mask denoising and thinning: square-kernel opening, Zhang-Suen thinning with a
// staircase cleanup pass, and branch-point removal. 8-connectivity throughout;
// pixels outside the raster count as background.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cablefit/types.hpp"

namespace cablefit {

inline constexpr std::array<Pixel, 8> kNeighborOffsets{
    {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};

namespace detail {

// Sliding-window pass along one axis. `all` selects erosion (window fully set) over dilation (any set).
inline void window_pass(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out, int width, int height,
                        int radius, bool along_x, bool all) {
  const int lines = along_x ? height : width;
  const int len = along_x ? width : height;
  const std::size_t stride = along_x ? 1 : static_cast<std::size_t>(width);
  const int full = 2 * radius + 1;
  for (int line = 0; line < lines; ++line) {
    const std::size_t base = along_x ? static_cast<std::size_t>(line) * width : static_cast<std::size_t>(line);
    auto at = [&](int i) { return (i >= 0 && i < len) ? in[base + i * stride] : std::uint8_t{0}; };
    int count = 0;
    for (int i = -radius; i <= radius; ++i) count += at(i) != 0;
    for (int i = 0; i < len; ++i) {
      out[base + i * stride] = all ? (count == full) : (count > 0);
      count -= at(i - radius) != 0;
      count += at(i + radius + 1) != 0;
    }
  }
}

inline BinaryMask morph(const BinaryMask& mask, int kernel, bool erosion) {
  if (kernel < 1 || kernel % 2 == 0) throw Error("structuring element size must be odd and positive");
  const int r = kernel / 2;
  std::vector<std::uint8_t> tmp(mask.size());
  std::vector<std::uint8_t> out(mask.size());
  window_pass(mask.data(), tmp, mask.width(), mask.height(), r, true, erosion);
  window_pass(tmp, out, mask.width(), mask.height(), r, false, erosion);
  return BinaryMask(mask.width(), mask.height(), std::move(out));
}

}  // namespace detail

/// Square-kernel erosion; out-of-image pixels are background.
inline BinaryMask erode(const BinaryMask& mask, int kernel = 3) { return detail::morph(mask, kernel, true); }

/// Square-kernel dilation.
inline BinaryMask dilate(const BinaryMask& mask, int kernel = 3) { return detail::morph(mask, kernel, false); }

/// dilate(erode(mask)). Removes isolated pixels and protrusions thinner than the kernel.
inline BinaryMask morphological_open(const BinaryMask& mask, int kernel = 3) {
  if (kernel < 3 || kernel % 2 == 0) throw Error("open kernel must be odd and >= 3");
  return dilate(erode(mask, kernel), kernel);
}

namespace detail {

// Raster with a one-pixel background border, so neighborhood reads need no bounds checks.
class PaddedRaster {
 public:
  PaddedRaster(int width, int height) : w_(width + 2), h_(height + 2), data_(static_cast<std::size_t>(w_) * h_, 0) {}

  std::uint8_t get(int x, int y) const { return data_[idx(x, y)]; }
  void set(int x, int y, std::uint8_t v) { data_[idx(x, y)] = v; }

  // Neighbors clockwise from north: P2..P9 in Zhang-Suen notation.
  std::array<std::uint8_t, 8> ring(int x, int y) const {
    return {get(x, y - 1), get(x + 1, y - 1), get(x + 1, y), get(x + 1, y + 1),
            get(x, y + 1), get(x - 1, y + 1), get(x - 1, y), get(x - 1, y - 1)};
  }

  int neighbor_count(int x, int y) const {
    int n = 0;
    for (auto v : ring(x, y)) n += v;
    return n;
  }

 private:
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y + 1) * w_ + static_cast<std::size_t>(x + 1); }
  int w_;
  int h_;
  std::vector<std::uint8_t> data_;
};

// Number of 0->1 transitions around the clockwise ring.
inline int transitions(const std::array<std::uint8_t, 8>& p) {
  int a = 0;
  for (int i = 0; i < 8; ++i) a += (p[i] == 0 && p[(i + 1) % 8] == 1);
  return a;
}

// Yokoi connectivity number for 8-connected foreground; 1 means removing the pixel keeps local topology.
inline int connectivity8(const std::array<std::uint8_t, 8>& p) {
  // ring order: N NE E SE S SW W NW. Yokoi uses E NE N NW W SW S SE (counter-clockwise from east).
  const std::array<int, 8> ccw{p[2], p[1], p[0], p[7], p[6], p[5], p[4], p[3]};
  int n = 0;
  for (int k = 0; k < 8; k += 2) {
    const int a = 1 - ccw[k];
    const int b = 1 - ccw[(k + 1) % 8];
    const int c = 1 - ccw[(k + 2) % 8];
    n += a - a * b * c;
  }
  return n;
}

}  // namespace detail

/// Zhang-Suen parallel thinning (no cleanup).
inline BinaryMask zhang_suen_thin(const BinaryMask& mask) {
  detail::PaddedRaster img(mask.width(), mask.height());
  std::vector<Pixel> live = mask.pixels();
  for (auto p : live) img.set(p.x, p.y, 1);

  std::vector<Pixel> doomed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int step = 0; step < 2; ++step) {
      doomed.clear();
      for (auto p : live) {
        const auto r = img.ring(p.x, p.y);
        int b = 0;
        for (auto v : r) b += v;
        if (b < 2 || b > 6 || detail::transitions(r) != 1) continue;
        // r[0]=P2 (N), r[2]=P4 (E), r[4]=P6 (S), r[6]=P8 (W)
        const bool ok = step == 0 ? (r[0] * r[2] * r[4] == 0 && r[2] * r[4] * r[6] == 0)
                                  : (r[0] * r[2] * r[6] == 0 && r[0] * r[4] * r[6] == 0);
        if (ok) doomed.push_back(p);
      }
      if (doomed.empty()) continue;
      changed = true;
      for (auto p : doomed) img.set(p.x, p.y, 0);
      std::erase_if(live, [&](Pixel p) { return img.get(p.x, p.y) == 0; });
    }
  }

  BinaryMask out(mask.width(), mask.height());
  for (auto p : live) out.set(p);
  return out;
}

/// Deletes corner pixels of 4-connected staircases (a pixel touching two perpendicular
/// 4-neighbors) when removal keeps local 8-connectivity. Raster-order sweeps repeat until stable.
inline BinaryMask remove_staircases(const BinaryMask& thin) {
  detail::PaddedRaster img(thin.width(), thin.height());
  std::vector<Pixel> live = thin.pixels();
  for (auto p : live) img.set(p.x, p.y, 1);

  bool changed = true;
  while (changed) {
    changed = false;
    for (auto p : live) {
      if (!img.get(p.x, p.y)) continue;
      const auto r = img.ring(p.x, p.y);
      const bool corner = (r[0] && r[2]) || (r[2] && r[4]) || (r[4] && r[6]) || (r[6] && r[0]);
      if (!corner || img.neighbor_count(p.x, p.y) < 2 || detail::connectivity8(r) != 1) continue;
      img.set(p.x, p.y, 0);
      changed = true;
    }
    std::erase_if(live, [&](Pixel p) { return img.get(p.x, p.y) == 0; });
  }

  BinaryMask out(thin.width(), thin.height());
  for (auto p : live) out.set(p);
  return out;
}

/// One-pixel-wide skeleton raster: Zhang-Suen followed by staircase cleanup.
inline BinaryMask skeletonize_raster(const BinaryMask& mask) { return remove_staircases(zhang_suen_thin(mask)); }

/// Skeleton pixels in row-major order.
inline std::vector<Pixel> skeletonize(const BinaryMask& mask) { return skeletonize_raster(mask).pixels(); }

/// Branch-free skeleton: every pixel has at most two 8-neighbors in `pixels`.
struct Skeleton {
  int width = 0;
  int height = 0;
  std::vector<Pixel> pixels;     // row-major
  std::vector<Pixel> endpoints;  // row-major; exactly the pixels with one neighbor
  Grid<std::uint8_t> raster;

  bool contains(Pixel p) const { return raster.contains(p) && raster[p] != 0; }

  int neighbor_count(Pixel p) const {
    int n = 0;
    for (auto d : kNeighborOffsets) n += contains({p.x + d.x, p.y + d.y});
    return n;
  }
};

/// Deletes, in one simultaneous pass, every pixel with more than two 8-neighbors in `thin`.
inline Skeleton remove_branch_points(const Grid<std::uint8_t>& thin) {
  const int w = thin.width();
  const int h = thin.height();
  auto on = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && thin(x, y) != 0; };
  auto count = [&](int x, int y) {
    int n = 0;
    for (auto d : kNeighborOffsets) n += on(x + d.x, y + d.y);
    return n;
  };

  Skeleton s;
  s.width = w;
  s.height = h;
  s.raster = Grid<std::uint8_t>(w, h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (thin(x, y) && count(x, y) <= 2) {
        s.raster(x, y) = 1;
        s.pixels.push_back({x, y});
      }
  for (auto p : s.pixels)
    if (s.neighbor_count(p) == 1) s.endpoints.push_back(p);
  return s;
}

/// Coordinate-set overload; coordinates must be non-negative. The raster spans the bounding box.
inline Skeleton remove_branch_points(std::span<const Pixel> pixels) {
  int w = 0;
  int h = 0;
  for (auto p : pixels) {
    if (p.x < 0 || p.y < 0) throw Error("skeleton coordinates must be non-negative");
    w = std::max(w, p.x + 1);
    h = std::max(h, p.y + 1);
  }
  Grid<std::uint8_t> g(w, h, 0);
  for (auto p : pixels) g[p] = 1;
  return remove_branch_points(g);
}

}  // namespace cablefit

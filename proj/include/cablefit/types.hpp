#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cablefit {

/// Raised for malformed inputs and violated preconditions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer pixel coordinate. Ordering is row-major: by y, then x.
struct Pixel {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(const Pixel&, const Pixel&) = default;
  friend constexpr std::strong_ordering operator<=>(const Pixel& a, const Pixel& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

inline constexpr bool are_8_neighbors(Pixel a, Pixel b) {
  const int dx = a.x - b.x;
  const int dy = a.y - b.y;
  return (dx != 0 || dy != 0) && dx >= -1 && dx <= 1 && dy >= -1 && dy <= 1;
}

inline double step_length(Pixel a, Pixel b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

/// Real-valued point; 2D data leaves z at zero.
struct Point {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr bool operator==(const Point&, const Point&) = default;

  constexpr Point& operator+=(const Point& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Point& operator-=(const Point& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Point& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  friend constexpr Point operator+(Point a, const Point& b) { return a += b; }
  friend constexpr Point operator-(Point a, const Point& b) { return a -= b; }
  friend constexpr Point operator*(Point a, double s) { return a *= s; }
  friend constexpr Point operator*(double s, Point a) { return a *= s; }
};

inline constexpr Point to_point(Pixel p) {
  return {static_cast<double>(p.x), static_cast<double>(p.y), 0.0};
}

inline constexpr double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Point& a, const Point& b) { return norm(a - b); }

/// Row-major raster of `T`.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(checked_area(width, height), fill) {}
  Grid(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_area(width, height)) throw Error("grid data length does not match dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool contains(Pixel p) const { return contains(p.x, p.y); }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](Pixel p) { return (*this)(p.x, p.y); }
  const T& operator[](Pixel p) const { return (*this)(p.x, p.y); }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  static std::size_t checked_area(int width, int height) {
    if (width < 0 || height < 0) throw Error("negative grid dimensions");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

inline constexpr int kMinMaskSide = 3;

/// Boolean occupancy raster; the pipeline input. Both sides must be at least 3 px.
class BinaryMask : public Grid<std::uint8_t> {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : Grid(validated(width, height), height, 0) {}
  BinaryMask(int width, int height, std::vector<std::uint8_t> data)
      : Grid(validated(width, height), height, std::move(data)) {}

  bool occupied(int x, int y) const { return contains(x, y) && (*this)(x, y) != 0; }
  bool occupied(Pixel p) const { return occupied(p.x, p.y); }
  void set(Pixel p, bool on = true) { (*this)[p] = on ? 1 : 0; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : data()) n += v != 0;
    return n;
  }

  /// Occupied pixels in row-major order.
  std::vector<Pixel> pixels() const {
    std::vector<Pixel> out;
    for (int y = 0; y < height(); ++y)
      for (int x = 0; x < width(); ++x)
        if ((*this)(x, y)) out.push_back({x, y});
    return out;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  static int validated(int width, int height) {
    if (width < kMinMaskSide || height < kMinMaskSide)
      throw Error("mask dimensions " + std::to_string(width) + "x" + std::to_string(height) +
                  " below minimum 3x3");
    return width;
  }
};

/// Depth raster with an explicit per-pixel validity flag.
struct DepthMap {
  Grid<double> depth;
  Grid<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int width, int height) : depth(width, height, 0.0), valid(width, height, 0) {}

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
  bool is_valid(Pixel p) const { return valid.contains(p) && valid[p] != 0; }
  void set(Pixel p, double z) {
    depth[p] = z;
    valid[p] = 1;
  }
};

}  // namespace cablefit

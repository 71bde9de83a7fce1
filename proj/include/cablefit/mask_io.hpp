#pragma once

// Mask/depth loading and the JSON curve document.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cablefit/curve.hpp"
#include "cablefit/image_io.hpp"
#include "cablefit/types.hpp"

namespace cablefit {

inline constexpr int kDefaultMaskThreshold = 127;

/// ITU-R BT.601 luma, rounded to the nearest integer intensity.
inline int luma(int r, int g, int b) {
  return static_cast<int>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

/// Pixels whose grayscale intensity exceeds `threshold` are occupied. Alpha channels are ignored.
inline BinaryMask mask_from_image(const image_io::RawImage& img, int threshold = kDefaultMaskThreshold) {
  if (img.bit_depth != 8) throw Error("unsupported bit depth " + std::to_string(img.bit_depth) + " for a mask");
  if (img.width == 0 || img.height == 0) throw Error("zero-area image");
  BinaryMask mask(img.width, img.height);
  const bool rgb = img.channels >= 3;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const int v = rgb ? luma(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)) : img.at(x, y, 0);
      mask(x, y) = v > threshold ? 1 : 0;
    }
  return mask;
}

inline BinaryMask load_mask(const std::filesystem::path& path, int threshold = kDefaultMaskThreshold) {
  if (threshold < 0 || threshold > 255) throw Error("mask threshold must lie in [0, 255]");
  try {
    return mask_from_image(image_io::read_image(path), threshold);
  } catch (const Error& e) {
    const std::string what = e.what();
    if (what.find(path.string()) != std::string::npos) throw;
    throw Error("'" + path.string() + "': " + what);
  }
}

/// Zero raw values are invalid; everything else is kept verbatim.
inline DepthMap depth_from_grid(int width, int height, const std::vector<double>& values) {
  if (width < 0 || height < 0) throw Error("negative depth dimensions");
  if (values.size() != static_cast<std::size_t>(width) * height) throw Error("depth value count mismatch");
  DepthMap d(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double v = values[static_cast<std::size_t>(y) * width + x];
      if (v != 0.0) d.set({x, y}, v);
    }
  return d;
}

namespace detail {

inline DepthMap read_depth_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  long long width = 0, height = 0;
  if (!(in >> width >> height)) throw Error("'" + path.string() + "': missing 'width height' header");
  if (width < 0 || height < 0) throw Error("'" + path.string() + "': negative dimensions in header");
  std::vector<double> values(static_cast<std::size_t>(width * height));
  for (auto& v : values)
    if (!(in >> v)) throw Error("'" + path.string() + "': truncated depth grid");
  return depth_from_grid(static_cast<int>(width), static_cast<int>(height), values);
}

inline bool starts_with_pnm_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char m[2] = {};
  in.read(m, 2);
  return in.gcount() == 2 && m[0] == 'P' && (m[1] == '2' || m[1] == '5');
}

}  // namespace detail

/// Loads a 16-bit single-channel PNG/PGM or a text grid ("width height" then row-major values).
inline DepthMap load_depth(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("cannot open '" + path.string() + "': no such file");
  if (!image_io::detail::has_png_signature(path) && !detail::starts_with_pnm_magic(path))
    return detail::read_depth_text(path);
  const auto img = image_io::read_image(path);
  if (img.channels != 1) throw Error("'" + path.string() + "': depth raster must be single-channel");
  if (img.bit_depth != 16 && !detail::starts_with_pnm_magic(path))
    throw Error("'" + path.string() + "': unsupported bit depth " + std::to_string(img.bit_depth) + " for depth");
  std::vector<double> values(img.samples.begin(), img.samples.end());
  return depth_from_grid(img.width, img.height, values);
}

inline void write_mask_png(const BinaryMask& mask, const std::filesystem::path& path) {
  std::vector<std::uint16_t> s(mask.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = mask.data()[i] ? 255 : 0;
  image_io::write_png(path, mask.width(), mask.height(), 1, 8, s);
}

/// 16-bit PNG; invalid pixels are written as zero, valid depths rounded and clamped to [1, 65535].
inline void write_depth_png(const DepthMap& depth, const std::filesystem::path& path) {
  std::vector<std::uint16_t> s(depth.depth.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (depth.valid.data()[i])
      s[i] = static_cast<std::uint16_t>(std::clamp<long>(std::lround(depth.depth.data()[i]), 1L, 65535L));
  image_io::write_png(path, depth.width(), depth.height(), 1, 16, s);
}

struct FrameInfo {
  int width = 0;
  int height = 0;
  std::string source;
  double elapsed_ms = 0.0;

  friend bool operator==(const FrameInfo&, const FrameInfo&) = default;
};

/// One frame of tracker output.
struct CurveDocument {
  FrameInfo frame;
  std::vector<BSplineCurve> instances;

  friend bool operator==(const CurveDocument&, const CurveDocument&) = default;
};

inline nlohmann::json to_json(const BSplineCurve& c) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : c.control_points)
    points.push_back(c.dim == 3 ? nlohmann::json{p.x, p.y, p.z} : nlohmann::json{p.x, p.y});
  return {{"degree", c.degree}, {"knots", c.knots}, {"control_points", points}, {"t_range", {c.t_min, c.t_max}}};
}

inline nlohmann::json to_json(const CurveDocument& doc) {
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& c : doc.instances) instances.push_back(to_json(c));
  return {{"frame",
           {{"width", doc.frame.width},
            {"height", doc.frame.height},
            {"source", doc.frame.source},
            {"elapsed_ms", doc.frame.elapsed_ms}}},
          {"instances", instances}};
}

inline BSplineCurve curve_from_json(const nlohmann::json& j) {
  BSplineCurve c;
  c.degree = j.at("degree").get<int>();
  c.knots = j.at("knots").get<std::vector<double>>();
  const auto& pts = j.at("control_points");
  c.dim = pts.empty() ? 2 : static_cast<int>(pts.front().size());
  for (const auto& p : pts) {
    if (static_cast<int>(p.size()) != c.dim) throw Error("control points mix 2D and 3D");
    c.control_points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), c.dim == 3 ? p.at(2).get<double>() : 0.0});
  }
  const auto range = j.at("t_range").get<std::vector<double>>();
  if (range.size() != 2) throw Error("t_range must have two entries");
  c.t_min = range[0];
  c.t_max = range[1];
  validate_curve(c);
  return c;
}

inline CurveDocument document_from_json(const nlohmann::json& j) {
  try {
    CurveDocument doc;
    const auto& f = j.at("frame");
    doc.frame.width = f.at("width").get<int>();
    doc.frame.height = f.at("height").get<int>();
    doc.frame.source = f.at("source").get<std::string>();
    doc.frame.elapsed_ms = f.at("elapsed_ms").get<double>();
    for (const auto& inst : j.at("instances")) doc.instances.push_back(curve_from_json(inst));
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed curve document: ") + e.what());
  }
}

/// Serialized text of `doc`; doubles carry 17 significant digits so they round-trip exactly.
inline std::string dump_curves(const CurveDocument& doc) { return to_json(doc).dump(2) + "\n"; }

inline void write_curves(const CurveDocument& doc, const std::filesystem::path& path) {
  for (const auto& c : doc.instances) validate_curve(c);
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << dump_curves(doc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
}

inline CurveDocument read_curves(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("'" + path.string() + "': " + e.what());
  }
  return document_from_json(j);
}

}  // namespace cablefit

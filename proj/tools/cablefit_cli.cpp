// cablefit: track, eval, synth and bench subcommands.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cablefit/cablefit.hpp"

namespace fs = std::filesystem;
using namespace cablefit;

namespace {

// Locale-independent fixed-point formatting.
std::string num(double v, int precision = 3) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
  return std::string(buf, r.ptr);
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

struct ConfigFlags {
  std::string config_file;
  std::optional<double> m, j_th;
  std::optional<int> p, k, w, open_kernel;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "JSON file with tracker settings (same keys as the flags)");
    app->add_option("--m", m, "distance/orientation mixing factor in [0, 1]");
    app->add_option("--p", p, "minimum segment length in pixels");
    app->add_option("--k", k, "interior knot count");
    app->add_option("--j-th", j_th, "connection cost threshold");
    app->add_option("--w", w, "endpoint tangent window in pixels");
    app->add_option("--open-kernel", open_kernel, "odd morphological opening kernel size");
  }

  TrackerConfig resolve() const {
    TrackerConfig cfg;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw Error("cannot read config file '" + config_file + "'");
      nlohmann::json j;
      try {
        in >> j;
        cfg.m = j.value("m", cfg.m);
        cfg.p = j.value("p", cfg.p);
        cfg.k = j.value("k", cfg.k);
        cfg.j_th = j.value("j_th", j.value("j-th", cfg.j_th));
        cfg.w = j.value("w", cfg.w);
        cfg.open_kernel = j.value("open_kernel", j.value("open-kernel", cfg.open_kernel));
      } catch (const nlohmann::json::exception& e) {
        throw Error("malformed config file '" + config_file + "': " + e.what());
      }
    }
    if (m) cfg.m = *m;
    if (p) cfg.p = *p;
    if (k) cfg.k = *k;
    if (j_th) cfg.j_th = *j_th;
    if (w) cfg.w = *w;
    if (open_kernel) cfg.open_kernel = *open_kernel;
    cfg.validate();
    return cfg;
  }
};

// ---- overlay -------------------------------------------------------------------------------

constexpr std::array<std::array<std::uint16_t, 3>, 6> kPalette{{
    {230, 25, 75}, {60, 180, 75}, {0, 130, 200}, {245, 130, 48}, {145, 30, 180}, {70, 240, 240}}};

void write_overlay(const BinaryMask& mask, const FrameResult& result, const fs::path& path) {
  const int w = mask.width(), h = mask.height();
  std::vector<std::uint16_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::uint16_t v = mask(x, y) ? 110 : 0;
      for (int c = 0; c < 3; ++c) rgb[(static_cast<std::size_t>(y) * w + x) * 3 + c] = v;
    }
  for (std::size_t i = 0; i < result.instances.size(); ++i) {
    const auto& color = kPalette[i % kPalette.size()];
    for (const auto& p : synth::dense_samples(result.instances[i], 0.5)) {
      const int x = static_cast<int>(std::lround(p.x)), y = static_cast<int>(std::lround(p.y));
      if (x < 0 || y < 0 || x >= w || y >= h) continue;
      for (int c = 0; c < 3; ++c) rgb[(static_cast<std::size_t>(y) * w + x) * 3 + c] = color[c];
    }
  }
  image_io::write_png(path, w, h, 3, 8, rgb);
}

// ---- track ---------------------------------------------------------------------------------

struct TrackArgs {
  std::vector<std::string> masks, depths;
  std::string out = ".";
  bool overlay = false, keep_going = false;
  ConfigFlags config;
};

int cmd_track(const TrackArgs& a) {
  const TrackerConfig cfg = a.config.resolve();
  const auto masks = sorted(a.masks);
  const auto depths = sorted(a.depths);
  if (!depths.empty() && depths.size() != masks.size()) {
    std::cerr << "error: " << depths.size() << " depth maps for " << masks.size() << " masks\n";
    return 2;
  }
  fs::create_directories(a.out);
  std::cout << "frame\tsource\tinstances\telapsed_ms\n";
  int failures = 0;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    try {
      const BinaryMask mask = load_mask(masks[i]);
      FrameResult r;
      if (depths.empty()) {
        r = track_frame(mask, cfg);
      } else {
        r = track_frame_3d(mask, load_depth(depths[i]), cfg);
      }
      for (const auto& d : r.diagnostics) std::cerr << masks[i] << ": " << d << "\n";
      const auto stem = fs::path(masks[i]).stem().string();
      write_curves(to_document(r, mask.width(), mask.height(), masks[i]), fs::path(a.out) / (stem + ".json"));
      if (a.overlay) write_overlay(mask, r, fs::path(a.out) / (stem + "_overlay.png"));
      std::cout << i << "\t" << masks[i] << "\t" << r.instances.size() << "\t" << num(r.elapsed_ms) << "\n";
    } catch (const Error& e) {
      ++failures;
      std::cerr << "error: " << masks[i] << ": " << e.what() << "\n";
      if (!a.keep_going) return 1;
    }
  }
  return failures ? 1 : 0;
}

// ---- eval ----------------------------------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> curves, masks, references;
  std::size_t samples = kDefaultMetricSamples;
  bool json = false;
};

// Reference document: either a curve document or a ground-truth polyline document.
std::vector<DiscretizedCurve> read_reference(const std::string& path, std::size_t samples) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    std::vector<DiscretizedCurve> out;
    for (const auto& inst : j.at("instances")) {
      if (inst.contains("points")) {
        std::vector<Point> pts;
        for (const auto& p : inst.at("points"))
          pts.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.size() > 2 ? p.at(2).get<double>() : 0.0});
        out.push_back(discretized(std::move(pts)));
      } else {
        out.push_back(discretized(curve_from_json(inst), samples));
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed reference '" + path + "': " + e.what());
  }
}

int cmd_eval(const EvalArgs& a) {
  const auto curves = sorted(a.curves);
  const auto masks = sorted(a.masks);
  const auto refs = sorted(a.references);
  if (masks.empty() && refs.empty()) {
    std::cerr << "error: eval needs --mask or --reference ground truth\n";
    return 2;
  }
  if ((!masks.empty() && masks.size() != curves.size()) || (!refs.empty() && refs.size() != curves.size())) {
    std::cerr << "error: frame count mismatch between curves and ground truth\n";
    return 2;
  }
  std::vector<double> l1, l2, l3;
  std::size_t missing = 0, redundant = 0;
  nlohmann::json rows = nlohmann::json::array();
  if (!a.json) {
    std::cout << "# aggregates are mean +- population std\n";
    std::cout << "frame";
    if (!masks.empty()) std::cout << "\tL1\tL2";
    if (!refs.empty()) std::cout << "\tL3\tmissing\tredundant";
    std::cout << "\n";
  }
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto doc = read_curves(curves[i]);
    nlohmann::json row{{"frame", i}, {"curves", curves[i]}};
    std::string line = std::to_string(i);
    if (!masks.empty()) {
      const auto mask = load_mask(masks[i]);
      if (doc.instances.empty()) throw Error("'" + curves[i] + "' has no instances to score against a mask");
      const auto s = l1_l2(mask, doc.instances, a.samples);
      l1.push_back(s.l1);
      l2.push_back(s.l2);
      row["L1"] = s.l1;
      row["L2"] = s.l2;
      line += "\t" + num(s.l1, 4) + "\t" + num(s.l2, 4);
    }
    if (!refs.empty()) {
      const auto ref = read_reference(refs[i], a.samples);
      std::vector<DiscretizedCurve> pred;
      for (const auto& c : doc.instances) pred.push_back(discretized(c, a.samples));
      const auto matches = match_instances(pred, ref);
      double acc = 0.0;
      for (const auto& m : matches) acc += m.l3;
      const std::size_t miss = ref.size() - matches.size(), red = pred.size() - matches.size();
      missing += miss;
      redundant += red;
      row["missing"] = miss;
      row["redundant"] = red;
      if (!matches.empty()) {
        const double v = acc / static_cast<double>(matches.size());
        l3.push_back(v);
        row["L3"] = v;
        line += "\t" + num(v, 4);
      } else {
        line += "\tnan";
      }
      line += "\t" + std::to_string(miss) + "\t" + std::to_string(red);
    }
    rows.push_back(row);
    if (!a.json) std::cout << line << "\n";
  }
  auto agg = [](const std::vector<double>& v) {
    const auto s = mean_std(v);
    return std::pair{s.mean, s.std};
  };
  if (a.json) {
    nlohmann::json out{{"frames", rows}, {"std", "population"}};
    for (const auto& [name, v] : {std::pair{"L1", &l1}, std::pair{"L2", &l2}, std::pair{"L3", &l3}}) {
      if (v->empty()) continue;
      const auto [m, s] = agg(*v);
      out["aggregate"][name] = {{"mean", m}, {"std", s}};
    }
    if (!refs.empty()) {
      out["missing"] = missing;
      out["redundant"] = redundant;
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::string line = "mean+-std";
    if (!masks.empty()) {
      const auto [m1, s1] = agg(l1);
      const auto [m2, s2] = agg(l2);
      line += "\t" + num(m1, 4) + "+-" + num(s1, 4) + "\t" + num(m2, 4) + "+-" + num(s2, 4);
    }
    if (!refs.empty()) {
      const auto [m3, s3] = agg(l3);
      line += "\t" + num(m3, 4) + "+-" + num(s3, 4) + "\t" + std::to_string(missing) + "\t" + std::to_string(redundant);
    }
    std::cout << line << "\n";
  }
  return 0;
}

// ---- synth ---------------------------------------------------------------------------------

synth::ScenarioSpec read_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read scenario '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed scenario '" + path + "': " + e.what());
  }
  return synth::scenario_from_json(j);
}

struct SynthArgs {
  std::string scenario, out = ".";
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
  const auto spec = read_scenario(a.scenario);
  const std::uint64_t seed = a.seed.value_or(spec.seed);
  fs::create_directories(a.out);
  const auto frames = synth::render_scenario(spec, seed);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    char id[16];
    std::snprintf(id, sizeof id, "%04zu", f);
    write_mask_png(frames[f].mask, fs::path(a.out) / ("mask_" + std::string(id) + ".png"));
    if (frames[f].depth) write_depth_png(*frames[f].depth, fs::path(a.out) / ("depth_" + std::string(id) + ".png"));
    std::ofstream(fs::path(a.out) / ("truth_" + std::string(id) + ".json")) << synth::truth_to_json(frames[f]).dump() << "\n";
  }
  std::cout << frames.size() << " frames written to " << a.out << "\n";
  return 0;
}

// ---- bench ---------------------------------------------------------------------------------

struct BenchArgs {
  std::string scenario;
  std::vector<std::string> masks;
  int reps = 10, warmup = 3;
  bool json = false;
  ConfigFlags config;
};

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

int cmd_bench(const BenchArgs& a) {
  const TrackerConfig cfg = a.config.resolve();
  if (a.reps < 1 || a.warmup < 0) throw Error("--reps must be >= 1 and --warmup >= 0");
  std::vector<BinaryMask> inputs;
  if (!a.scenario.empty()) {
    const auto spec = read_scenario(a.scenario);
    for (auto& fr : synth::render_scenario(spec, spec.seed)) inputs.push_back(std::move(fr.mask));
  }
  for (const auto& m : sorted(a.masks)) inputs.push_back(load_mask(m));
  if (inputs.empty()) throw Error("bench needs --scenario or --mask input");

  for (int i = 0; i < a.warmup; ++i) (void)track_frame(inputs[static_cast<std::size_t>(i) % inputs.size()], cfg);

  std::map<std::string, std::vector<double>> samples;
  std::vector<std::vector<BSplineCurve>> first_run;
  bool deterministic = true;
  for (int rep = 0; rep < a.reps; ++rep)
    for (std::size_t f = 0; f < inputs.size(); ++f) {
      const auto r = track_frame(inputs[f], cfg);
      for (std::size_t s = 0; s < StageTimings::kNames.size(); ++s)
        samples[std::string(StageTimings::kNames[s])].push_back(r.stage_timings.ms[s]);
      samples["total"].push_back(r.elapsed_ms);
      if (rep == 0) first_run.push_back(r.instances);
      else if (r.instances != first_run[f]) deterministic = false;
    }

  std::vector<std::string> order(StageTimings::kNames.begin(), StageTimings::kNames.end());
  order.push_back("total");
  if (a.json) {
    nlohmann::json out{{"frames", inputs.size()}, {"reps", a.reps}, {"warmup", a.warmup}, {"deterministic", deterministic}};
    for (const auto& name : order) {
      const auto& v = samples[name];
      out["stages"][name] = {{"min_ms", quantile(v, 0.0)}, {"median_ms", quantile(v, 0.5)}, {"p95_ms", quantile(v, 0.95)}};
    }
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "stage\tmin_ms\tmedian_ms\tp95_ms\n";
    for (const auto& name : order) {
      const auto& v = samples[name];
      std::cout << name << "\t" << num(quantile(v, 0.0)) << "\t" << num(quantile(v, 0.5)) << "\t"
                << num(quantile(v, 0.95)) << "\n";
    }
    std::cout << "# frames " << inputs.size() << ", reps " << a.reps << ", outputs "
              << (deterministic ? "identical" : "DIFFER") << " across reps\n";
  }
  return deterministic ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cable tracking from segmentation masks with cubic B-splines"};
  app.require_subcommand(1);

  TrackArgs track;
  auto* t = app.add_subcommand("track", "fit curves to mask images");
  t->add_option("--mask", track.masks, "mask images")->required();
  t->add_option("--depth", track.depths, "depth maps, paired with masks in sorted order");
  t->add_option("--out", track.out, "output directory");
  t->add_flag("--overlay", track.overlay, "also write PNG overlays");
  t->add_flag("--keep-going", track.keep_going, "continue after a frame fails");
  track.config.add_to(t);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "score curve documents");
  e->add_option("--curves", eval.curves, "curve documents")->required();
  e->add_option("--mask", eval.masks, "masks for L1/L2");
  e->add_option("--reference", eval.references, "reference documents for L3");
  e->add_option("--samples", eval.samples, "curve samples per instance")->check(CLI::PositiveNumber);
  e->add_flag("--json", eval.json, "machine-readable output");

  SynthArgs syn;
  auto* s = app.add_subcommand("synth", "render a synthetic scenario");
  s->add_option("--scenario", syn.scenario, "scenario JSON")->required();
  s->add_option("--out", syn.out, "output directory");
  s->add_option("--seed", syn.seed, "override the scenario seed");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "per-stage latency");
  b->add_option("--scenario", bench.scenario, "scenario JSON");
  b->add_option("--mask", bench.masks, "mask images");
  b->add_option("--reps", bench.reps, "repetitions over the input");
  b->add_option("--warmup", bench.warmup, "untimed warm-up frames");
  b->add_flag("--json", bench.json, "machine-readable output");
  bench.config.add_to(b);

  CLI11_PARSE(app, argc, argv);
  try {
    if (t->parsed()) return cmd_track(track);
    if (e->parsed()) return cmd_eval(eval);
    if (s->parsed()) return cmd_synth(syn);
    if (b->parsed()) return cmd_bench(bench);
  } catch (const Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

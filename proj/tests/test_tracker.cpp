#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace cablefit;
using namespace cablefit::testing;
using namespace cablefit::synth;

namespace {

ScenarioSpec s_curve() {
  ScenarioSpec s;
  s.cables.push_back({{{{60, 380, 0}, {160, 60, 0}, {320, 60, 0}, {320, 420, 0}, {480, 420, 0}, {580, 100, 0}}}, 0.0});
  return s;
}

ScenarioSpec two_ribbons() {
  ScenarioSpec s;
  s.cables.push_back({{{{40, 80, 0}, {200, 60, 0}, {400, 100, 0}, {600, 80, 0}}}, 0.0});
  s.cables.push_back({{{{40, 380, 0}, {200, 420, 0}, {400, 360, 0}, {600, 400, 0}}}, 0.0});
  return s;
}

double best_l3(const BSplineCurve& c, const std::vector<DiscretizedCurve>& truth) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : truth) best = std::min(best, l3_unoriented(discretized(c), t));
  return best;
}

}  // namespace

TEST(TrackFrame, BlankMask) {
  const auto r = track_frame(BinaryMask(64, 48));
  EXPECT_TRUE(r.instances.empty());
  EXPECT_TRUE(r.chains.empty());
  EXPECT_GE(r.elapsed_ms, 0.0);
}

TEST(TrackFrame, SCurveGivesOneInstance) {
  const auto fr = render_frame(s_curve(), 0, 1);
  const auto r = track_frame(fr.mask);
  ASSERT_EQ(r.instances.size(), 1u);
  EXPECT_TRUE(check_curve(r.instances[0]).empty());
  EXPECT_EQ(r.instances[0].control_points.size(), 29u);
  EXPECT_LE(l1_l2(fr.mask, r.instances[0]).l1, 3.0);
  EXPECT_LE(best_l3(r.instances[0], fr.truth), 2.0);
  for (double ms : r.stage_timings.ms) EXPECT_GE(ms, 0.0);
  EXPECT_LE(r.stage_timings.sum(), r.elapsed_ms + 1e-6);
}

TEST(TrackFrame, TwoDisjointRibbons) {
  const auto fr = render_frame(two_ribbons(), 0, 1);
  const auto r = track_frame(fr.mask);
  ASSERT_EQ(r.instances.size(), 2u);
  for (const auto& c : r.instances) EXPECT_LE(best_l3(c, fr.truth), 2.0);
}

TEST(TrackFrame, OcclusionIsBridged) {
  auto spec = s_curve();
  spec.occlusions.push_back({305, 200, 30, 60});
  const auto fr = render_frame(spec, 0, 1);
  const auto r = track_frame(fr.mask);
  ASSERT_EQ(r.instances.size(), 1u);
  EXPECT_EQ(r.chains[0].segments.size(), 2u);
  EXPECT_LE(best_l3(r.instances[0], fr.truth), 5.0);
}

TEST(TrackFrame, DeterministicAndOrientedCanonically) {
  const auto fr = render_frame(two_ribbons(), 0, 4);
  const auto a = track_frame(fr.mask), b = track_frame(fr.mask);
  EXPECT_EQ(a.instances, b.instances);
  for (const auto& c : a.chains) EXPECT_LE(c.first_pixel(), c.last_pixel());
  for (std::size_t i = 1; i < a.chains.size(); ++i) EXPECT_LT(a.chains[i - 1].first_pixel(), a.chains[i].first_pixel());
}

TEST(TrackFrame, InstancesNeverExceedSegments) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScenarioSpec spec = s_curve();
    spec.speckles = 200;
    spec.cables[0].step_bound = 6;
    spec.frames = 8;
    for (const auto& fr : render_scenario(spec, seed)) {
      const auto r = track_frame(fr.mask);
      const auto skel = remove_branch_points(skeletonize_raster(morphological_open(fr.mask)));
      EXPECT_LE(r.instances.size(), filter_short(walk_segments(skel), 10).size());
      ASSERT_GE(r.instances.size(), 1u);
    }
  }
}

TEST(TrackFrame, CurveStaysNearTheMask) {
  const auto fr = render_frame(s_curve(), 0, 2);
  const auto r = track_frame(fr.mask);
  ASSERT_EQ(r.instances.size(), 1u);
  const auto grown = dilate(fr.mask, 5);
  for (const auto& p : sample_uniform(r.instances[0], 2000))
    ASSERT_TRUE(grown.occupied(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y))));
}

TEST(TrackFrame, ConfigValidation) {
  TrackerConfig cfg;
  cfg.m = 1.5;
  EXPECT_THROW(track_frame(BinaryMask(5, 5), cfg), Error);
  cfg = {};
  cfg.k = 0;
  EXPECT_THROW(track_frame(BinaryMask(5, 5), cfg), Error);
  cfg = {};
  cfg.open_kernel = 4;
  EXPECT_THROW(track_frame(BinaryMask(5, 5), cfg), Error);
}

TEST(TrackFrame, ShortChainsAreSkipped) {
  BinaryMask m(40, 40);
  for (int y = 18; y <= 22; ++y)
    for (int x = 10; x <= 24; ++x) m.set({x, y});
  TrackerConfig cfg;
  cfg.p = 1;
  const auto r = track_frame(m, cfg);
  // a 15 x 5 block thins to a short run; it is still long enough for a single-knot cubic
  ASSERT_EQ(r.instances.size(), 1u);
  EXPECT_EQ(r.instances[0].knots.size(), r.instances[0].control_points.size() + 4);
}

TEST(TrackFrame3d, ConstantPlane) {
  auto spec = s_curve();
  spec.depth = {DepthMode::plane, 500.0, 500.0};
  const auto fr = render_frame(spec, 0, 1);
  const auto r = track_frame_3d(fr.mask, *fr.depth);
  ASSERT_EQ(r.instances.size(), 1u);
  EXPECT_EQ(r.instances[0].dim, 3);
  for (const auto& p : r.instances[0].control_points) EXPECT_NEAR(p.z, 500.0, 1e-6);
}

TEST(TrackFrame3d, DimensionMismatch) {
  EXPECT_THROW(track_frame_3d(BinaryMask(640, 480), DepthMap(320, 240)), Error);
}

TEST(TrackFrame3d, MissingDepthFallsBackTo2d) {
  const auto fr = render_frame(s_curve(), 0, 1);
  const auto r = track_frame_3d(fr.mask, DepthMap(640, 480));
  ASSERT_EQ(r.instances.size(), 1u);
  EXPECT_EQ(r.instances[0].dim, 2);
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(TrackFrame3d, HelixAgainstReference) {
  // projected helix: a sinusoid in the image, depth varying with the same phase
  ScenarioSpec spec;
  spec.depth.mode = DepthMode::from_curve;
  Polygon poly;
  for (int i = 0; i <= 12; ++i) {
    const double a = i * 0.9;
    poly.push_back({50 + 45.0 * i, 240 + 120 * std::sin(a), 600 + 80 * std::cos(a)});
  }
  spec.cables.push_back({{poly}, 0.0});
  const auto fr = render_frame(spec, 0, 1);
  const auto r = track_frame_3d(fr.mask, *fr.depth);
  ASSERT_EQ(r.instances.size(), 1u);
  ASSERT_EQ(r.instances[0].dim, 3);
  EXPECT_LE(l3_unoriented(discretized(r.instances[0]), fr.truth[0]), 3.0);
}

TEST(Associate, LinksInstancesAcrossFrames) {
  auto spec = two_ribbons();
  spec.frames = 2;
  spec.cables[0].step_bound = 2;
  spec.cables[1].step_bound = 2;
  const auto frames = render_scenario(spec, 3);
  const auto a = track_frame(frames[0].mask), b = track_frame(frames[1].mask);
  const auto links = associate_instances(a.instances, b.instances);
  ASSERT_EQ(links.size(), 2u);
  for (const auto& l : links) {
    EXPECT_EQ(l.previous, l.current);
    EXPECT_LT(l.l3, 10.0);
  }
}

TEST(Document, CarriesFrameInfo) {
  const auto fr = render_frame(s_curve(), 0, 1);
  const auto doc = to_document(track_frame(fr.mask), 640, 480, "s.png");
  EXPECT_EQ(doc.frame.width, 640);
  EXPECT_EQ(doc.frame.source, "s.png");
  EXPECT_EQ(doc.instances.size(), 1u);
}

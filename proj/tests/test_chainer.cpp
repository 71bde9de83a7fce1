#include <gtest/gtest.h>

#include <numbers>

#include "test_support.hpp"

using namespace cablefit;
using namespace cablefit::testing;

namespace {

PixelPath line_path(Pixel from, int dx, int dy, int count) {
  std::vector<Pixel> pts;
  for (int i = 0; i < count; ++i) pts.push_back({from.x + i * dx, from.y + i * dy});
  return make_path(std::move(pts));
}

PixelPath path_of_size(std::size_t n) { return line_path({0, 0}, 1, 0, static_cast<int>(n)); }

EndpointDescriptor desc(std::size_t id, Pixel at, Point tangent) { return {id, End::head, at, tangent}; }

// Random short straight or bent polylines scattered over a small canvas.
std::vector<PixelPath> random_segments(std::mt19937& rng, int count) {
  std::uniform_int_distribution<int> pos(0, 60), len(3, 12), dir(-1, 1);
  std::vector<PixelPath> out;
  while (static_cast<int>(out.size()) < count) {
    int dx = dir(rng), dy = dir(rng);
    if (dx == 0 && dy == 0) continue;
    Pixel p{pos(rng), pos(rng)};
    std::vector<Pixel> pts{p};
    const int n = len(rng);
    for (int i = 1; i < n; ++i) {
      if (i == n / 2 && rng() % 2) {
        const int ndx = dir(rng), ndy = dir(rng);
        if (ndx != 0 || ndy != 0) dx = ndx, dy = ndy;
      }
      p = {p.x + dx, p.y + dy};
      pts.push_back(p);
    }
    out.push_back(make_path(std::move(pts)));
  }
  return out;
}

void expect_partition(const std::vector<SegmentChain>& chains, std::size_t segments) {
  std::vector<int> seen(segments, 0);
  for (const auto& c : chains) {
    ASSERT_FALSE(c.segments.empty());
    ASSERT_EQ(c.gap_distances.size(), c.segments.size() - 1);
    for (std::size_t i = 0; i < c.segments.size(); ++i) {
      ++seen[c.segments[i].source];
      if (i > 0) {
        const double gap = distance(to_point(c.segments[i - 1].exit()), to_point(c.segments[i].entry()));
        EXPECT_DOUBLE_EQ(c.gap_distances[i - 1], gap);
      }
    }
  }
  for (int n : seen) EXPECT_EQ(n, 1);
}

}  // namespace

TEST(FilterShort, KeepsPathsAtOrAboveMinimum) {
  const std::vector<PixelPath> paths{path_of_size(3), path_of_size(10), path_of_size(25)};
  const auto kept = filter_short(paths, 10);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].size(), 10u);
  EXPECT_EQ(kept[1].size(), 25u);
  EXPECT_EQ(filter_short(paths, 1), paths);
  EXPECT_TRUE(filter_short(paths, 26).empty());
}

TEST(Tangent, CollinearWindowIsClamped) {
  const auto path = make_path({{0, 0}, {1, 0}, {2, 0}});
  const auto tail = endpoint_tangent(path, End::tail, 5);
  EXPECT_DOUBLE_EQ(tail.x, 1.0);
  EXPECT_DOUBLE_EQ(tail.y, 0.0);
  const auto head = endpoint_tangent(path, End::head, 5);
  EXPECT_DOUBLE_EQ(head.x, -1.0);
  EXPECT_DOUBLE_EQ(head.y, 0.0);
}

TEST(Tangent, BentPathWindowTwo) {
  const auto t = endpoint_tangent(make_path({{0, 0}, {1, 0}, {2, 1}}), End::tail, 2);
  EXPECT_NEAR(t.x, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(t.y, 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(PairCost, HeadOnCollinear) {
  const auto a = desc(0, {0, 0}, {1, 0, 0});
  const auto b = desc(1, {10, 0}, {-1, 0, 0});
  EXPECT_NEAR(orientation_cost(a, b), 0.0, 1e-15);
  EXPECT_NEAR(pair_cost(a, b, 0.05), 0.5, 1e-12);
}

TEST(PairCost, PerpendicularTangent) {
  const auto a = desc(0, {0, 0}, {1, 0, 0});
  const auto b = desc(1, {10, 0}, {0, 1, 0});
  EXPECT_NEAR(orientation_cost(a, b), std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(pair_cost(a, b, 0.05), 0.5 + 0.95 * std::numbers::pi / 2, 1e-12);
  EXPECT_NEAR(pair_cost(a, b, 0.05), 1.99226, 1e-5);
}

TEST(PairCost, PureDistanceAtMOne) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  for (int i = 0; i < 20; ++i) {
    const double u = ang(rng), v = ang(rng);
    const auto a = desc(0, {3, 4}, {std::cos(u), std::sin(u), 0});
    const auto b = desc(1, {-5, 10}, {std::cos(v), std::sin(v), 0});
    EXPECT_NEAR(pair_cost(a, b, 1.0), 10.0, 1e-12);
  }
}

TEST(PairCost, OrientationTermBoundsAndSymmetry) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
  std::uniform_int_distribution<int> pos(-20, 20);
  for (int i = 0; i < 500; ++i) {
    const double u = ang(rng), v = ang(rng);
    const auto a = desc(0, {pos(rng), pos(rng)}, {std::cos(u), std::sin(u), 0});
    auto b = desc(1, {pos(rng), pos(rng)}, {std::cos(v), std::sin(v), 0});
    if (a.position == b.position) continue;
    const double jo = orientation_cost(a, b);
    EXPECT_GE(jo, 0.0);
    EXPECT_LE(jo, 2 * std::numbers::pi + 1e-12);
    EXPECT_NEAR(jo, orientation_cost(b, a), 1e-12);
  }
  // anti-aligned: both tangents point away from the other endpoint
  EXPECT_NEAR(orientation_cost(desc(0, {0, 0}, {-1, 0, 0}), desc(1, {10, 0}, {1, 0, 0})), 2 * std::numbers::pi,
              1e-12);
}

TEST(PairCost, SameSegmentRejected) {
  EXPECT_THROW(pair_cost(desc(0, {0, 0}, {1, 0, 0}), desc(0, {5, 0}, {1, 0, 0}), 0.05), Error);
}

TEST(ChainGreedy, ZeroPaths) { EXPECT_TRUE(chain_greedy({}, ChainerParams{}).empty()); }

TEST(ChainGreedy, SingleSegment) {
  const auto chains = chain_greedy({line_path({0, 0}, 1, 0, 20)}, ChainerParams{});
  ASSERT_EQ(chains.size(), 1u);
  EXPECT_EQ(chains[0].segments.size(), 1u);
  EXPECT_TRUE(chains[0].gap_distances.empty());
}

TEST(ChainGreedy, BridgesCollinearGap) {
  // tail of the first at x = 19, head of the second at x = 29
  const std::vector<PixelPath> paths{line_path({0, 5}, 1, 0, 20), line_path({29, 5}, 1, 0, 20)};
  const auto chains = chain_greedy(paths, ChainerParams{});
  ASSERT_EQ(chains.size(), 1u);
  ASSERT_EQ(chains[0].segments.size(), 2u);
  ASSERT_EQ(chains[0].gap_distances.size(), 1u);
  EXPECT_DOUBLE_EQ(chains[0].gap_distances[0], 10.0);
  EXPECT_EQ(chains[0].first_pixel(), (Pixel{0, 5}));
  EXPECT_EQ(chains[0].last_pixel(), (Pixel{48, 5}));
  // enumeration: the facing pair is the cheapest of the four
  const auto pairs = admissible_pairs(describe_endpoints(paths, 10), ChainerParams{});
  ASSERT_FALSE(pairs.empty());
  EXPECT_EQ(pairs[0].a, (EndRef{0, End::tail}));
  EXPECT_EQ(pairs[0].b, (EndRef{1, End::head}));
  EXPECT_NEAR(pairs[0].cost, 0.5, 1e-12);
}

TEST(ChainGreedy, FarParallelSegmentsStaySeparate) {
  const std::vector<PixelPath> paths{line_path({0, 0}, 1, 0, 50), line_path({0, 300}, 1, 0, 50)};
  ChainerParams params;
  EXPECT_TRUE(admissible_pairs(describe_endpoints(paths, params.w), params).empty());
  EXPECT_EQ(chain_greedy(paths, params).size(), 2u);
}

TEST(ChainGreedy, ReversedChainSwapsEnds) {
  const std::vector<PixelPath> paths{line_path({0, 5}, 1, 0, 20), line_path({29, 5}, 1, 0, 20)};
  const auto c = chain_greedy(paths, ChainerParams{})[0];
  const auto r = reversed(c);
  EXPECT_EQ(r.first_pixel(), c.last_pixel());
  EXPECT_EQ(r.last_pixel(), c.first_pixel());
  EXPECT_EQ(r.gap_distances, c.gap_distances);
}

TEST(ChainGreedy, PropertiesOnRandomInstances) {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto paths = random_segments(rng, 2 + trial % 6);
    ChainerParams params;
    params.m = 0.05 + 0.1 * (trial % 4);
    params.w = 2 + trial % 9;
    const auto pairs = admissible_pairs(describe_endpoints(paths, params.w), params);
    const auto committed = greedy_connections(paths, params);
    // endpoint-disjoint and acyclic
    std::set<std::size_t> slots;
    for (const auto& c : committed) {
      ASSERT_TRUE(slots.insert(c.a.slot()).second);
      ASSERT_TRUE(slots.insert(c.b.slot()).second);
      ASSERT_LT(c.cost, params.j_th);
    }
    ASSERT_TRUE(brute_acyclic(committed, paths.size()));
    ASSERT_LE(committed.size() + 1, std::max<std::size_t>(paths.size(), 1));
    // first pick is the global minimum admissible pair
    if (!pairs.empty()) {
      ASSERT_FALSE(committed.empty());
      double best = std::numeric_limits<double>::infinity();
      for (const auto& p : pairs) best = std::min(best, p.cost);
      ASSERT_EQ(committed[0].cost, best);
    }
    const auto chains = assemble_chains(paths, committed);
    ASSERT_EQ(chains.size() + committed.size(), paths.size());
    expect_partition(chains, paths.size());
    ASSERT_EQ(chain_greedy(paths, params).size(), chains.size()) << "deterministic";
  }
}

TEST(ChainGreedy, LowerThresholdCommitsArePrefix) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto paths = random_segments(rng, 5);
    std::vector<Connection> prev;
    std::size_t prev_chains = paths.size();
    for (double th : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
      ChainerParams params;
      params.j_th = th;
      const auto committed = greedy_connections(paths, params);
      ASSERT_GE(committed.size(), prev.size());
      for (std::size_t i = 0; i < prev.size(); ++i) {
        ASSERT_EQ(committed[i].a, prev[i].a);
        ASSERT_EQ(committed[i].b, prev[i].b);
      }
      const auto n = chain_greedy(paths, params).size();
      ASSERT_LE(n, prev_chains);
      prev = committed;
      prev_chains = n;
    }
  }
}

TEST(ChainGreedy, AdversarialCaseIsSuboptimal) {
  // The cheapest pair blocks two slightly dearer ones whose sum undercuts it plus the only
  // remaining admissible pair.
  const std::vector<Connection> pairs{
      {{0, End::tail}, {1, End::head}, 1.0},
      {{0, End::tail}, {2, End::head}, 1.1},
      {{1, End::head}, {2, End::tail}, 1.1},
      {{1, End::tail}, {2, End::head}, 5.0},
  };
  const auto committed = greedy_commit(pairs, 3);
  ASSERT_EQ(committed.size(), 2u);
  double greedy_total = 0.0;
  for (const auto& c : committed) greedy_total += c.cost;
  EXPECT_DOUBLE_EQ(greedy_total, 6.0);
  EXPECT_DOUBLE_EQ(exhaustive_min_total(pairs, 3, 2), 2.2);
}

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "thermoforge/enumeration.hpp"
#include "thermoforge/errors.hpp"
#include "thermoforge/notation.hpp"
#include "thermoforge/spatial.hpp"

using namespace thermoforge;
using namespace thermoforge::spatial;

namespace {

const std::vector<Point3> kSixDevices{{2, 0, 0}, {2, 1, 0}, {3, 1, 0}, {12, 12, 0}, {15, 10, 0}, {13, 13, 0}};

double dist2(const Point3& a, const Point3& b) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Member nearest the centroid of the members, smaller label on ties.
Label nearest_to_centroid(const std::vector<Point3>& pts, const std::vector<Label>& members) {
  Point3 c{0, 0, 0};
  for (Label l : members)
    for (int i = 0; i < 3; ++i) c[i] += pts[static_cast<std::size_t>(l - 1)][i] / static_cast<double>(members.size());
  Label best = members.front();
  double bd = std::numeric_limits<double>::infinity();
  for (Label l : members) {
    const double d = dist2(pts[static_cast<std::size_t>(l - 1)], c);
    if (d < bd - 1e-12) bd = d, best = l;
  }
  return best;
}

DeviceLayout six_device_layout() {
  DeviceLayout l;
  l.positions = kSixDevices;
  l.heat_loads_kw = std::vector<double>(6, 5.0);
  return l;
}

}  // namespace

TEST(KMeans, SixDeviceSplitForAnySeed) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = kmeans(kSixDevices, 2, seed);
    EXPECT_EQ(canonical_partition(r.assignment, 2), (std::vector<std::vector<int>>{{0, 1, 2}, {3, 4, 5}}));
    // every point is closer to its own centroid than to the other one
    for (std::size_t i = 0; i < kSixDevices.size(); ++i) {
      const int a = r.assignment[i];
      EXPECT_LE(dist2(kSixDevices[i], r.centroids[static_cast<std::size_t>(a)]),
                dist2(kSixDevices[i], r.centroids[static_cast<std::size_t>(1 - a)]));
    }
  }
}

TEST(KMeans, SingletonsAndIdenticalPoints) {
  const auto r = kmeans(kSixDevices, 6, 3);
  EXPECT_EQ(canonical_partition(r.assignment, 6).size(), 6u);
  EXPECT_NEAR(r.inertia, 0.0, 1e-12);

  const std::vector<Point3> same(4, Point3{1.5, -2.0, 0.25});
  const auto s = kmeans(same, 1, 0);
  ASSERT_EQ(s.centroids.size(), 1u);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(s.centroids[0][i], same[0][i]);
}

TEST(KMeans, InertiaMatchesAssignment) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 3.0);
  std::vector<Point3> pts(40);
  for (auto& p : pts) p = {g(rng), g(rng), g(rng)};
  const auto r = kmeans(pts, 4, 9);
  double inertia = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    inertia += dist2(pts[i], r.centroids[static_cast<std::size_t>(r.assignment[i])]);
  EXPECT_NEAR(r.inertia, inertia, 1e-9 * (1.0 + inertia));
  // deterministic for a fixed seed
  EXPECT_EQ(kmeans(pts, 4, 9).assignment, r.assignment);
}

TEST(KMeans, RejectsBadK) {
  EXPECT_THROW(kmeans(kSixDevices, 0, 0), ValidationError);
  EXPECT_THROW(kmeans(kSixDevices, 7, 0), ValidationError);
}

TEST(Silhouette, HandComputedValue) {
  // two pairs on a line: {0,1} and {10,11}
  const std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}, {10, 0, 0}, {11, 0, 0}};
  const std::vector<int> a{0, 0, 1, 1};
  // point 0: a=1, b=(10+11)/2=10.5 -> 1-1/10.5; point 1: a=1, b=9.5 -> 1-1/9.5; symmetric
  const double expected = (2.0 * (1.0 - 1.0 / 10.5) + 2.0 * (1.0 - 1.0 / 9.5)) / 4.0;
  EXPECT_NEAR(mean_silhouette(pts, a, 2), expected, 1e-12);
}

TEST(ClusterCount, SixDeviceLayoutPicksTwo) {
  const auto sel = select_cluster_count(kSixDevices);
  EXPECT_EQ(sel.k, 2);
  EXPECT_EQ(canonical_partition(sel.assignment, sel.k), (std::vector<std::vector<int>>{{0, 1, 2}, {3, 4, 5}}));
}

TEST(ClusterCount, TrivialCases) {
  EXPECT_EQ(select_cluster_count(std::vector<Point3>{{1, 2, 3}}).k, 1);
  const std::vector<Point3> pairs{{0, 0, 0}, {0, 1, 0}, {50, 0, 0}, {50, 1, 0}};
  EXPECT_EQ(select_cluster_count(pairs).k, 2);
}

TEST(SuperNodeTree, SixDeviceJunctions) {
  const auto layout = six_device_layout();
  const auto tree = build_supernode_tree(layout, 1);
  ASSERT_EQ(tree.achieved_depth(), 1);
  ASSERT_EQ(tree.levels[1].size(), 2u);
  const auto& a = tree.levels[1][0];
  const auto& b = tree.levels[1][1];
  EXPECT_EQ(a.members, (std::vector<Label>{1, 2, 3}));
  EXPECT_EQ(b.members, (std::vector<Label>{4, 5, 6}));
  EXPECT_EQ(a.junction, nearest_to_centroid(layout.positions, a.members));
  EXPECT_EQ(b.junction, nearest_to_centroid(layout.positions, b.members));
  EXPECT_EQ(a.junction, 2);
  EXPECT_NEAR(a.centroid[0], 7.0 / 3.0, 1e-12);
  EXPECT_NEAR(a.centroid[1], 2.0 / 3.0, 1e-12);
  EXPECT_EQ(a.parent_chain, (std::vector<Label>{config::kTank}));
}

TEST(SuperNodeTree, SingleDevice) {
  DeviceLayout l;
  l.positions = {{0, 0, 0}};
  const auto tree = build_supernode_tree(l, 1);
  ASSERT_EQ(tree.achieved_depth(), 1);
  ASSERT_EQ(tree.levels[1].size(), 1u);
  EXPECT_EQ(tree.levels[1][0].junction, 1);
  const auto pop = enumeration::generate_level_graphs(tree, 1);
  ASSERT_EQ(pop.size(), 1u);
  EXPECT_EQ(pop.keys()[0], "0 (1)");
}

TEST(SuperNodeTree, TwoLevelsNestJunctions) {
  // three well-separated groups, one of them made of two sub-groups
  DeviceLayout l;
  l.positions = {{0, 0, 0},   {0.2, 0, 0},  {0, 0.2, 0},  {3, 0, 0},  {3.2, 0, 0}, {3, 0.2, 0},
                 {1.5, 0.1, 0}, {60, 60, 0}, {60.5, 60, 0}, {60, 60.5, 0}};
  const auto tree = build_supernode_tree(l, 2);
  ASSERT_GE(tree.achieved_depth(), 2);
  for (std::size_t i = 0; i < tree.levels[2].size(); ++i) {
    const auto& sn = tree.levels[2][i];
    const auto& parent = tree.levels[1][static_cast<std::size_t>(sn.parent)];
    ASSERT_EQ(sn.parent_chain.size(), 2u);
    EXPECT_EQ(sn.parent_chain.back(), parent.junction);
    for (Label m : sn.members)
      EXPECT_TRUE(std::binary_search(parent.members.begin(), parent.members.end(), m));
  }
}

TEST(LevelGraphs, SixDeviceNineConfigurations) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto tree = build_supernode_tree(six_device_layout(), 1);
  const auto pop = enumeration::generate_level_graphs(tree, 1);
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(pop.size(), 9u);
  EXPECT_EQ(enumeration::level_graph_count(tree, 1), 9);
  for (std::uint64_t i = 0; i < 9; ++i) {
    const auto g = enumeration::level_graph_at(tree, 1, i);
    EXPECT_EQ(g.children(config::kTank).size(), 2u);
    EXPECT_EQ(g.node_count(), 6);
  }
  EXPECT_LT(s, 5.0);
}

TEST(LevelGraphs, IndexedAccessMatchesFullGeneration) {
  DeviceLayout l;
  l.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {20, 0, 0}, {21, 0, 0}, {20, 1, 0}};
  const auto tree = build_supernode_tree(l, 1);
  const auto pop = enumeration::generate_level_graphs(tree, 1);
  ASSERT_EQ(enumeration::level_graph_count(tree, 1), pop.size());
  std::set<std::string> by_index;
  for (std::uint64_t i = 0; i < pop.size(); ++i)
    by_index.insert(config::serialize(enumeration::level_graph_at(tree, 1, i)));
  EXPECT_EQ(by_index, (std::set<std::string>(pop.keys().begin(), pop.keys().end())));
  EXPECT_THROW(enumeration::level_graph_at(tree, 1, pop.size()), ValidationError);
}

TEST(Layout, JsonValidation) {
  EXPECT_THROW(layout_from_json(nlohmann::json::parse(R"({"positions": [[0]]})")), ValidationError);
  EXPECT_DOUBLE_EQ(layout_from_json(nlohmann::json::parse(R"({"positions": [[1,2]]})")).positions[0][2], 0.0);
  EXPECT_THROW(layout_from_json(nlohmann::json::parse(R"({"positions": [[0,0,0]], "heat_loads_kw": [1,2]})")),
               ValidationError);
  const auto l = layout_from_json(to_json(six_device_layout()));
  EXPECT_EQ(l.device_count(), 6);
}

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermoforge/config_graph.hpp"

namespace thermoforge::spatial {

using config::Label;
using Point3 = std::array<double, 3>;

/// Device positions and heat loads. Device label k sits at `positions[k-1]`.
struct DeviceLayout {
  std::vector<Point3> positions;
  std::vector<double> heat_loads_kw;

  [[nodiscard]] int device_count() const noexcept { return static_cast<int>(positions.size()); }
  /// Throws ValidationError on non-finite coordinates or a load/position count mismatch.
  void validate() const;
};

/// {"positions": [[x,y,z],...], "heat_loads_kw": [...]}; "heat_loads_kw" may be omitted.
DeviceLayout layout_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DeviceLayout& layout);

struct KMeansResult {
  std::vector<int> assignment;   ///< cluster index per point
  std::vector<Point3> centroids;
  int iterations = 0;
  double inertia = 0.0;          ///< sum of squared distances to assigned centroid
};

/// Lloyd's algorithm with k-means++ seeding drawn from `seed`.
///
/// A cluster that empties during iteration is re-seeded at the point farthest
/// from its currently assigned centroid. Deterministic for a fixed seed.
KMeansResult kmeans(std::span<const Point3> points, int k, std::uint64_t seed, int max_iterations = 300);

/// Mean silhouette coefficient of a partition. Singleton clusters score 0.
double mean_silhouette(std::span<const Point3> points, std::span<const int> assignment, int k);

/// Clusters as sorted point-index lists, ordered by smallest member; relabeling-invariant.
std::vector<std::vector<int>> canonical_partition(std::span<const int> assignment, int k);

struct ClusterOptions {
  int restarts = 10;          ///< seeds tried per K when testing stability
  std::uint64_t seed = 0;     ///< base seed; restart r uses seed + r
  /// Separation score assigned to K = 1. A two-way split must beat it to be
  /// preferred over keeping the points together.
  double single_cluster_score = 0.5;
};

struct ClusterSelection {
  int k = 1;
  std::vector<int> assignment;
  std::vector<Point3> centroids;
};

/// Smallest K in [1, N-1] whose partition is identical across all restarts and
/// whose silhouette beats that of K+1; K = 1 when nothing qualifies.
ClusterSelection select_cluster_count(std::span<const Point3> points, const ClusterOptions& options = {});

struct SuperNode {
  std::vector<Label> members;        ///< sorted; includes the junction
  Label junction = config::kTank;    ///< the tank for the level-0 super-node
  std::vector<Label> parent_chain;   ///< tank first, then ancestor junctions (excludes own junction)
  int parent = -1;                   ///< index into the previous level
  std::vector<int> children;         ///< indices into the next level
  Point3 centroid{0.0, 0.0, 0.0};
};

struct SuperNodeTree {
  std::vector<std::vector<SuperNode>> levels;  ///< levels[0] holds the single root super-node
  int requested_levels = 0;

  /// Number of clustering levels actually built below the root.
  [[nodiscard]] int achieved_depth() const noexcept { return static_cast<int>(levels.size()) - 1; }
};

/// Hierarchical clustering of device positions into super-nodes with junctions.
///
/// Each super-node's member pool (minus its own junction) is clustered with
/// select_cluster_count; every resulting cluster becomes a child super-node
/// whose junction is the member nearest the cluster centroid (ties go to the
/// smaller label). Stops early when no pool can be split any further.
SuperNodeTree build_supernode_tree(const DeviceLayout& layout, int num_levels, const ClusterOptions& options = {});

nlohmann::json to_json(const SuperNodeTree& tree);

}  // namespace thermoforge::spatial

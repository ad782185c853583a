#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "thermoforge/config_graph.hpp"
#include "thermoforge/spatial.hpp"

namespace thermoforge::enumeration {

using config::ConfigGraph;
using config::Label;
using BigInt = boost::multiprecision::cpp_int;

inline constexpr int kDefaultGenerateCap = 8;
inline constexpr int kDefaultCountCap = 20;

enum class Strategy { kSingleSplit, kSpatialJunctions, kEnumeratedJunctions };

Strategy strategy_from_string(const std::string& name);
std::string to_string(Strategy s);

struct EnumerationRequest {
  int n_devices = 1;
  int max_junctions = 0;
  Strategy strategy = Strategy::kSingleSplit;
  int level = 1;
};

/// Distinct configuration graphs over one label set, with a provenance note.
class GraphPopulation {
 public:
  GraphPopulation() = default;
  explicit GraphPopulation(std::string provenance) : provenance_(std::move(provenance)) {}

  /// Appends unless an identical graph (same canonical notation) is present.
  bool add(ConfigGraph graph);

  /// Reorders graphs by canonical notation.
  void sort_by_key();

  [[nodiscard]] std::size_t size() const noexcept { return graphs_.size(); }
  [[nodiscard]] bool empty() const noexcept { return graphs_.empty(); }
  [[nodiscard]] const std::vector<ConfigGraph>& graphs() const noexcept { return graphs_; }
  [[nodiscard]] const std::vector<std::string>& keys() const noexcept { return keys_; }
  [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }

 private:
  std::vector<ConfigGraph> graphs_;
  std::vector<std::string> keys_;
  std::unordered_set<std::string> seen_;
  std::string provenance_;
};

/// G(n) = sum_{k=1}^{n} C(n,k) C(n-1,k-1) (n-k)!, the number of single-split
/// configurations of n devices. G(0) = 1 (the empty configuration).
BigInt count_single_split(int n, int cap = kDefaultCountCap);

/// F_1(n) = G(n); F_J(n) = sum_{M=1}^{n} C(n,M) G(M) F_{J-1}(n-M); F_J(0) = 1.
BigInt count_multi_split(int n, int junctions, int cap = kDefaultCountCap);

/// Every way to arrange `labels` as a set of series chains (each chain is one
/// branch). Chains are ordered by their smallest label; arrangements are
/// returned sorted by canonical notation of the corresponding graph.
std::vector<std::vector<std::vector<Label>>> chain_arrangements(std::span<const Label> labels);

/// All single-split graphs over labels 1..n (branches only at the tank).
GraphPopulation enumerate_single_split(int n, int cap = kDefaultGenerateCap);

enum class TreeMode {
  kIncreasing,  ///< node k attaches only to nodes 1..k-1 (the classic generator)
  kAllLabeled,  ///< every labeled tree whose root has exactly one child
};

/// Rooted trees over 1..n hanging from a single tank edge. kIncreasing yields
/// (n-1)! trees, kAllLabeled yields n^(n-1).
GraphPopulation enumerate_trees(int n, TreeMode mode = TreeMode::kIncreasing, int cap = kDefaultGenerateCap);

/// How the free members of a super-node are arranged under its junction.
enum class SubgraphMode {
  kSeriesParallel,   ///< sets of series chains hanging from the junction
  kIncreasingTrees,  ///< increasing trees rooted at the junction
  kAllTrees,         ///< all labeled trees rooted at the junction
};

/// Edge sets rooted at `root` covering `members`, one entry per arrangement.
std::vector<std::vector<config::Edge>> subgraphs_under(Label root, std::span<const Label> members, SubgraphMode mode);

/// Super-nodes whose sub-graphs are combined when generating a given level:
/// every super-node at `level` plus childless super-nodes above it.
std::vector<const spatial::SuperNode*> level_frontier(const spatial::SuperNodeTree& tree, int level);

/// Size of the level population without materializing it.
BigInt level_graph_count(const spatial::SuperNodeTree& tree, int level,
                         SubgraphMode mode = SubgraphMode::kSeriesParallel);

/// Graph number `index` of the level population (mixed-radix over super-nodes,
/// first super-node varying slowest). Same order as generate_level_graphs.
ConfigGraph level_graph_at(const spatial::SuperNodeTree& tree, int level, std::uint64_t index,
                           SubgraphMode mode = SubgraphMode::kSeriesParallel);

/// Cartesian product over frontier super-nodes of (path from tank through the
/// ancestor junctions) + (one arrangement of the members under the junction).
GraphPopulation generate_level_graphs(const spatial::SuperNodeTree& tree, int level,
                                      SubgraphMode mode = SubgraphMode::kSeriesParallel,
                                      std::size_t max_graphs = 1'000'000);

/// Every choice of `junctions` junction labels out of 1..n, each hanging from
/// the tank, with the remaining labels distributed among the junctions and
/// arranged as series chains under them.
GraphPopulation enumerate_junction_placements(int n, int junctions, int cap = kDefaultGenerateCap);

}  // namespace thermoforge::enumeration

#include "thermoforge/enumeration.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>

#include "thermoforge/errors.hpp"
#include "thermoforge/notation.hpp"

namespace thermoforge::enumeration {

namespace {

void check_cap(int n, int cap, const char* what) {
  if (n > cap)
    throw CapExceededError(std::string(what) + ": n=" + std::to_string(n) + " exceeds the enumeration cap of " +
                               std::to_string(cap),
                           cap);
}

BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

BigInt factorial(int n) {
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Builds a graph from tank-rooted chains.
ConfigGraph graph_from_chains(const std::vector<std::vector<Label>>& chains, Label root = config::kTank) {
  std::vector<config::Edge> edges;
  for (const auto& ch : chains) {
    Label prev = root;
    for (Label l : ch) {
      edges.emplace_back(prev, l);
      prev = l;
    }
  }
  return ConfigGraph::from_edges(edges);
}

std::string chains_key(const std::vector<std::vector<Label>>& chains) {
  return config::serialize(graph_from_chains(chains));
}

// Increasing trees: node i (i >= 1 in local numbering) attaches to any of 0..i-1
// except that only node 1 may attach to local node 0.
void increasing_parent_tables(int m, std::vector<std::vector<int>>& out) {
  // Local numbering: 0 = root, 1..m members. Root has exactly the child 1.
  if (m == 0) {
    out.push_back({-1});
    return;
  }
  std::vector<int> parent(m + 1, -1);
  parent[1] = 0;
  std::function<void(int)> rec = [&](int k) {
    if (k > m) {
      out.push_back(parent);
      return;
    }
    for (int p = 1; p < k; ++p) {
      parent[k] = p;
      rec(k + 1);
    }
  };
  rec(2);
}

// All parent tables over local nodes 1..m with root 0 having exactly one child, acyclic.
void all_parent_tables(int m, std::vector<std::vector<int>>& out) {
  if (m == 0) {
    out.push_back({-1});
    return;
  }
  std::vector<int> parent(m + 1, -1);
  std::function<void(int, int)> rec = [&](int k, int root_children) {
    if (k > m) {
      if (root_children != 1) return;
      for (int v = 1; v <= m; ++v) {
        int cur = v, steps = 0;
        while (cur != 0) {
          cur = parent[cur];
          if (++steps > m) return;
        }
      }
      out.push_back(parent);
      return;
    }
    for (int p = 0; p <= m; ++p) {
      if (p == k) continue;
      if (p == 0 && root_children == 1) continue;
      parent[k] = p;
      rec(k + 1, root_children + (p == 0 ? 1 : 0));
    }
  };
  rec(1, 0);
}

std::vector<std::vector<config::Edge>> edges_from_tables(Label root, std::span<const Label> members,
                                                         const std::vector<std::vector<int>>& tables) {
  std::vector<std::vector<config::Edge>> out;
  for (const auto& t : tables) {
    std::vector<config::Edge> edges;
    for (std::size_t v = 1; v < t.size(); ++v) {
      const Label child = members[v - 1];
      const Label parent = t[v] == 0 ? root : members[t[v] - 1];
      edges.emplace_back(parent, child);
    }
    out.push_back(std::move(edges));
  }
  return out;
}

}  // namespace

Strategy strategy_from_string(const std::string& name) {
  if (name == "single_split") return Strategy::kSingleSplit;
  if (name == "spatial_junctions") return Strategy::kSpatialJunctions;
  if (name == "enumerated_junctions") return Strategy::kEnumeratedJunctions;
  throw ValidationError("unknown strategy '" + name + "'");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kSingleSplit: return "single_split";
    case Strategy::kSpatialJunctions: return "spatial_junctions";
    case Strategy::kEnumeratedJunctions: return "enumerated_junctions";
  }
  return "unknown";
}

bool GraphPopulation::add(ConfigGraph graph) {
  std::string key = config::serialize(graph);
  if (!seen_.insert(key).second) return false;
  keys_.push_back(std::move(key));
  graphs_.push_back(std::move(graph));
  return true;
}

void GraphPopulation::sort_by_key() {
  std::vector<std::size_t> order(graphs_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys_[a] < keys_[b]; });
  std::vector<ConfigGraph> g;
  std::vector<std::string> k;
  for (auto i : order) {
    g.push_back(std::move(graphs_[i]));
    k.push_back(std::move(keys_[i]));
  }
  graphs_ = std::move(g);
  keys_ = std::move(k);
}

BigInt count_single_split(int n, int cap) {
  if (n < 0) throw ValidationError("device count must be non-negative");
  check_cap(n, cap, "count_single_split");
  if (n == 0) return 1;
  BigInt total = 0;
  for (int k = 1; k <= n; ++k) total += binomial(n, k) * binomial(n - 1, k - 1) * factorial(n - k);
  return total;
}

BigInt count_multi_split(int n, int junctions, int cap) {
  if (n < 0) throw ValidationError("device count must be non-negative");
  if (junctions < 1) throw ValidationError("junction count must be at least 1");
  check_cap(n, cap, "count_multi_split");
  std::vector<BigInt> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = count_single_split(i, cap);
  // f[m] holds F_{J}(m) for the current J, built up from F_1 = G.
  std::vector<BigInt> f = g;
  for (int j = 2; j <= junctions; ++j) {
    std::vector<BigInt> next(n + 1);
    next[0] = 1;
    for (int m = 1; m <= n; ++m) {
      BigInt s = 0;
      for (int M = 1; M <= m; ++M) s += binomial(m, M) * g[M] * f[m - M];
      next[m] = s;
    }
    f = std::move(next);
  }
  return f[n];
}

std::vector<std::vector<std::vector<Label>>> chain_arrangements(std::span<const Label> labels) {
  std::vector<std::vector<std::vector<Label>>> out;
  std::vector<std::vector<Label>> chains;
  // Insert labels one at a time: into any position of an existing chain, or as a new chain.
  // Removing the last inserted label inverts the step, so each arrangement appears once.
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == labels.size()) {
      auto copy = chains;
      std::sort(copy.begin(), copy.end(),
                [](const auto& a, const auto& b) { return *std::min_element(a.begin(), a.end()) < *std::min_element(b.begin(), b.end()); });
      out.push_back(std::move(copy));
      return;
    }
    const Label l = labels[i];
    for (std::size_t c = 0; c < chains.size(); ++c) {
      for (std::size_t pos = 0; pos <= chains[c].size(); ++pos) {
        chains[c].insert(chains[c].begin() + static_cast<std::ptrdiff_t>(pos), l);
        rec(i + 1);
        chains[c].erase(chains[c].begin() + static_cast<std::ptrdiff_t>(pos));
      }
    }
    chains.push_back({l});
    rec(i + 1);
    chains.pop_back();
  };
  rec(0);
  if (labels.empty()) return out;
  std::vector<std::string> keys;
  keys.reserve(out.size());
  for (const auto& a : out) keys.push_back(chains_key(a));
  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<std::vector<std::vector<Label>>> sorted;
  sorted.reserve(out.size());
  for (auto i : order) sorted.push_back(std::move(out[i]));
  return sorted;
}

GraphPopulation enumerate_single_split(int n, int cap) {
  if (n < 1) throw ValidationError("enumerate_single_split needs n >= 1");
  check_cap(n, cap, "enumerate_single_split");
  std::vector<Label> labels(n);
  std::iota(labels.begin(), labels.end(), 1);
  GraphPopulation pop("single_split n=" + std::to_string(n));
  for (const auto& a : chain_arrangements(labels)) pop.add(graph_from_chains(a));
  pop.sort_by_key();
  return pop;
}

GraphPopulation enumerate_trees(int n, TreeMode mode, int cap) {
  if (n < 1) throw ValidationError("enumerate_trees needs n >= 1");
  check_cap(n, cap, "enumerate_trees");
  GraphPopulation pop(std::string(mode == TreeMode::kIncreasing ? "increasing_trees" : "all_labeled_trees") +
                      " n=" + std::to_string(n));
  if (mode == TreeMode::kIncreasing) {
    // eG[1] = [(0,1)]; node k joins every graph of eG[k-1] at each node in 1..k-1.
    std::vector<std::vector<config::Edge>> current{{{0, 1}}};
    for (int k = 2; k <= n; ++k) {
      std::vector<std::vector<config::Edge>> next;
      for (const auto& g : current) {
        for (Label node = 1; node < k; ++node) {
          auto extended = g;
          extended.emplace_back(node, k);
          next.push_back(std::move(extended));
        }
      }
      current = std::move(next);
    }
    for (const auto& edges : current) pop.add(ConfigGraph::from_edges(edges));
  } else {
    std::vector<Label> members(n);
    std::iota(members.begin(), members.end(), 1);
    for (const auto& edges : subgraphs_under(config::kTank, members, SubgraphMode::kAllTrees))
      pop.add(ConfigGraph::from_edges(edges));
  }
  pop.sort_by_key();
  return pop;
}

std::vector<std::vector<config::Edge>> subgraphs_under(Label root, std::span<const Label> members, SubgraphMode mode) {
  std::vector<Label> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  switch (mode) {
    case SubgraphMode::kSeriesParallel: {
      std::vector<std::vector<config::Edge>> out;
      if (sorted.empty()) return {{}};
      for (const auto& chains : chain_arrangements(sorted)) {
        std::vector<config::Edge> edges;
        for (const auto& ch : chains) {
          Label prev = root;
          for (Label l : ch) {
            edges.emplace_back(prev, l);
            prev = l;
          }
        }
        out.push_back(std::move(edges));
      }
      return out;
    }
    case SubgraphMode::kIncreasingTrees: {
      std::vector<std::vector<int>> tables;
      increasing_parent_tables(static_cast<int>(sorted.size()), tables);
      return edges_from_tables(root, sorted, tables);
    }
    case SubgraphMode::kAllTrees: {
      std::vector<std::vector<int>> tables;
      all_parent_tables(static_cast<int>(sorted.size()), tables);
      return edges_from_tables(root, sorted, tables);
    }
  }
  return {};
}

std::vector<const spatial::SuperNode*> level_frontier(const spatial::SuperNodeTree& tree, int level) {
  if (level < 1) throw ValidationError("graph generation level must be at least 1");
  if (level > tree.achieved_depth())
    throw ValidationError("tree has depth " + std::to_string(tree.achieved_depth()) + ", level " +
                          std::to_string(level) + " requested");
  std::vector<const spatial::SuperNode*> out;
  for (int l = 1; l < level; ++l)
    for (const auto& sn : tree.levels[l])
      if (sn.children.empty()) out.push_back(&sn);
  for (const auto& sn : tree.levels[level]) out.push_back(&sn);
  return out;
}

namespace {

struct LevelParts {
  std::vector<std::vector<config::Edge>> paths;                   // per frontier super-node
  std::vector<std::vector<std::vector<config::Edge>>> subgraphs;  // per frontier super-node
};

LevelParts level_parts(const spatial::SuperNodeTree& tree, int level, SubgraphMode mode) {
  LevelParts parts;
  for (const auto* sn : level_frontier(tree, level)) {
    if (sn->members.empty()) continue;  // empty super-node: nothing to place
    if (sn->junction == config::kTank || std::find(sn->members.begin(), sn->members.end(), sn->junction) == sn->members.end())
      throw ValidationError("super-node has no junction among its members");
    std::vector<config::Edge> path;
    std::vector<Label> chain = sn->parent_chain;
    chain.push_back(sn->junction);
    for (std::size_t i = 1; i < chain.size(); ++i) path.emplace_back(chain[i - 1], chain[i]);
    std::vector<Label> free;
    for (Label m : sn->members)
      if (m != sn->junction) free.push_back(m);
    parts.paths.push_back(std::move(path));
    parts.subgraphs.push_back(subgraphs_under(sn->junction, free, mode));
  }
  return parts;
}

ConfigGraph merge(const LevelParts& parts, const std::vector<std::size_t>& choice) {
  std::vector<config::Edge> edges;
  for (std::size_t s = 0; s < parts.paths.size(); ++s) {
    edges.insert(edges.end(), parts.paths[s].begin(), parts.paths[s].end());
    const auto& sub = parts.subgraphs[s][choice[s]];
    edges.insert(edges.end(), sub.begin(), sub.end());
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return ConfigGraph::from_edges(edges);
}

}  // namespace

BigInt level_graph_count(const spatial::SuperNodeTree& tree, int level, SubgraphMode mode) {
  BigInt total = 1;
  for (const auto* sn : level_frontier(tree, level)) {
    if (sn->members.empty()) continue;
    const int free = static_cast<int>(sn->members.size()) - 1;
    switch (mode) {
      case SubgraphMode::kSeriesParallel: total *= count_single_split(free, 64); break;
      case SubgraphMode::kIncreasingTrees: total *= factorial(std::max(free - 1, 0)); break;
      case SubgraphMode::kAllTrees: {
        BigInt p = 1;
        for (int i = 0; i < free - 1; ++i) p *= free;
        total *= p;
        break;
      }
    }
  }
  return total;
}

ConfigGraph level_graph_at(const spatial::SuperNodeTree& tree, int level, std::uint64_t index, SubgraphMode mode) {
  const auto parts = level_parts(tree, level, mode);
  std::vector<std::size_t> choice(parts.paths.size(), 0);
  BigInt total = 1;
  for (const auto& s : parts.subgraphs) total *= s.size();
  if (BigInt(index) >= total) throw ValidationError("configuration index " + std::to_string(index) + " out of range");
  for (std::size_t s = parts.paths.size(); s-- > 0;) {
    const auto radix = parts.subgraphs[s].size();
    choice[s] = static_cast<std::size_t>(index % radix);
    index /= radix;
  }
  return merge(parts, choice);
}

GraphPopulation generate_level_graphs(const spatial::SuperNodeTree& tree, int level, SubgraphMode mode,
                                      std::size_t max_graphs) {
  const auto parts = level_parts(tree, level, mode);
  BigInt total = 1;
  for (const auto& s : parts.subgraphs) total *= s.size();
  if (total > max_graphs)
    throw CapExceededError("level population of " + total.str() + " graphs exceeds the cap of " +
                               std::to_string(max_graphs),
                           static_cast<int>(std::min<std::size_t>(max_graphs, INT32_MAX)));
  GraphPopulation pop("spatial_junctions level=" + std::to_string(level));
  std::vector<std::size_t> choice(parts.paths.size(), 0);
  const auto count = static_cast<std::size_t>(total);
  for (std::size_t i = 0; i < count; ++i) {
    pop.add(merge(parts, choice));
    for (std::size_t s = parts.paths.size(); s-- > 0;) {
      if (++choice[s] < parts.subgraphs[s].size()) break;
      choice[s] = 0;
    }
  }
  return pop;
}

GraphPopulation enumerate_junction_placements(int n, int junctions, int cap) {
  if (n < 1) throw ValidationError("enumerate_junction_placements needs n >= 1");
  if (junctions < 1 || junctions > n)
    throw ValidationError("junction count must lie in [1, " + std::to_string(n) + "]");
  check_cap(n, cap, "enumerate_junction_placements");
  GraphPopulation pop("enumerated_junctions n=" + std::to_string(n) + " j=" + std::to_string(junctions));

  std::vector<int> select(n, 0);
  std::fill(select.begin(), select.begin() + junctions, 1);
  // prev_permutation over a descending-sorted mask walks all C(n, j) subsets.
  do {
    std::vector<Label> junction_labels, rest;
    for (int i = 0; i < n; ++i) (select[i] ? junction_labels : rest).push_back(i + 1);
    // Assign every remaining label to a junction: base-j counter.
    std::vector<int> owner(rest.size(), 0);
    for (;;) {
      std::vector<std::vector<Label>> groups(junction_labels.size());
      for (std::size_t r = 0; r < rest.size(); ++r) groups[owner[r]].push_back(rest[r]);
      std::vector<std::vector<std::vector<config::Edge>>> per_junction;
      for (std::size_t j = 0; j < junction_labels.size(); ++j)
        per_junction.push_back(subgraphs_under(junction_labels[j], groups[j], SubgraphMode::kSeriesParallel));
      std::vector<std::size_t> choice(per_junction.size(), 0);
      for (;;) {
        std::vector<config::Edge> edges;
        for (std::size_t j = 0; j < junction_labels.size(); ++j) {
          edges.emplace_back(config::kTank, junction_labels[j]);
          const auto& sub = per_junction[j][choice[j]];
          edges.insert(edges.end(), sub.begin(), sub.end());
        }
        pop.add(ConfigGraph::from_edges(edges));
        std::size_t s = per_junction.size();
        while (s-- > 0) {
          if (++choice[s] < per_junction[s].size()) break;
          choice[s] = 0;
        }
        if (s == static_cast<std::size_t>(-1)) break;
      }
      std::size_t r = 0;
      for (; r < owner.size(); ++r) {
        if (++owner[r] < junctions) break;
        owner[r] = 0;
      }
      if (r == owner.size()) break;
    }
  } while (std::prev_permutation(select.begin(), select.end()));
  pop.sort_by_key();
  return pop;
}

}  // namespace thermoforge::enumeration

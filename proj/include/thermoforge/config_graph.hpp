#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace thermoforge::config {

/// Device identity. The tank is always label 0; devices carry positive labels.
using Label = int;

inline constexpr Label kTank = 0;

using Edge = std::pair<Label, Label>;

/// Rooted tree of the tank plus labeled device nodes: one candidate architecture.
///
/// The tree is stored as a parent table. Children of every node are kept in
/// canonical order (ascending smallest label of the child's subtree), which is
/// what makes serialization deterministic. Labels need not be contiguous, but
/// every label appears exactly once.
class ConfigGraph {
 public:
  ConfigGraph() = default;

  /// `parent[k]` is the parent of label k; entries for absent labels must be
  /// `kAbsent`, and `parent[0]` is ignored.
  static ConfigGraph from_parents(std::vector<Label> parent);

  /// Tree edges oriented away from the tank.
  static ConfigGraph from_edges(std::span<const Edge> edges);

  static constexpr Label kAbsent = -2;

  /// Number of devices (excludes the tank).
  [[nodiscard]] int node_count() const noexcept { return static_cast<int>(labels_.size()); }

  /// Device labels in ascending order.
  [[nodiscard]] std::span<const Label> labels() const noexcept { return labels_; }

  [[nodiscard]] bool contains(Label label) const noexcept;

  [[nodiscard]] Label parent(Label node) const;

  [[nodiscard]] std::span<const Label> children(Label node) const;

  [[nodiscard]] bool is_leaf(Label node) const { return children(node).empty(); }

  /// Smallest label contained in the subtree rooted at `node` (the tank's is 0).
  [[nodiscard]] Label subtree_min(Label node) const;

  /// Nodes in depth-first preorder following canonical child order, tank first.
  [[nodiscard]] std::vector<Label> preorder() const;

  /// Edges (parent, child) listed in preorder of the child.
  [[nodiscard]] std::vector<Edge> edges() const;

  /// Largest device label; 0 for an empty graph.
  [[nodiscard]] Label max_label() const noexcept { return labels_.empty() ? 0 : labels_.back(); }

  friend bool operator==(const ConfigGraph& a, const ConfigGraph& b) { return a.parent_ == b.parent_; }

 private:
  std::vector<Label> parent_;
  std::vector<std::vector<Label>> children_;
  std::vector<Label> subtree_min_;
  std::vector<Label> labels_;
};

}  // namespace thermoforge::config

#include "thermoforge/config_graph.hpp"

#include <algorithm>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge::config {

namespace {

std::string label_str(Label l) { return std::to_string(l); }

}  // namespace

ConfigGraph ConfigGraph::from_parents(std::vector<Label> parent) {
  if (parent.empty()) throw ValidationError("parent table is empty");
  ConfigGraph g;
  const auto size = static_cast<Label>(parent.size());
  parent[0] = -1;
  for (Label k = 1; k < size; ++k) {
    const Label p = parent[k];
    if (p == kAbsent) continue;
    if (p < 0 || p >= size) throw ValidationError("node " + label_str(k) + " has out-of-range parent " + label_str(p));
    if (p == k) throw ValidationError("node " + label_str(k) + " is its own parent");
    if (p != kTank && parent[p] == kAbsent)
      throw ValidationError("node " + label_str(k) + " hangs from absent node " + label_str(p));
    g.labels_.push_back(k);
  }
  // Trim trailing absent labels so equal trees compare equal.
  while (parent.size() > 1 && parent.back() == kAbsent) parent.pop_back();
  g.parent_ = std::move(parent);

  const auto n = g.parent_.size();
  g.children_.assign(n, {});
  for (Label k : g.labels_) g.children_[g.parent_[k]].push_back(k);

  // Every node must reach the tank: walk up with a step bound.
  for (Label k : g.labels_) {
    Label cur = k;
    std::size_t steps = 0;
    while (cur != kTank) {
      cur = g.parent_[cur];
      if (++steps > n) throw ValidationError("cycle through node " + label_str(k));
    }
  }

  g.subtree_min_.assign(n, 0);
  // Post-order accumulation: process nodes by decreasing depth.
  std::vector<int> depth(n, 0);
  for (Label k : g.labels_) {
    int d = 0;
    for (Label cur = k; cur != kTank; cur = g.parent_[cur]) ++d;
    depth[k] = d;
  }
  std::vector<Label> order = g.labels_;
  std::sort(order.begin(), order.end(), [&](Label a, Label b) { return depth[a] > depth[b]; });
  for (Label k : g.labels_) g.subtree_min_[k] = k;
  for (Label k : order) {
    Label p = g.parent_[k];
    if (p != kTank) g.subtree_min_[p] = std::min(g.subtree_min_[p], g.subtree_min_[k]);
  }
  for (auto& ch : g.children_) {
    std::sort(ch.begin(), ch.end(),
              [&](Label a, Label b) { return g.subtree_min_[a] < g.subtree_min_[b]; });
  }
  return g;
}

ConfigGraph ConfigGraph::from_edges(std::span<const Edge> edges) {
  Label max_label = 0;
  for (const auto& [p, c] : edges) {
    if (c <= 0) throw ValidationError("edge (" + label_str(p) + "," + label_str(c) + ") points to a non-device label");
    if (p < 0) throw ValidationError("negative label " + label_str(p));
    max_label = std::max({max_label, p, c});
  }
  std::vector<Label> parent(static_cast<std::size_t>(max_label) + 1, kAbsent);
  for (const auto& [p, c] : edges) {
    if (parent[c] != kAbsent) throw ValidationError("node " + label_str(c) + " has more than one parent");
    parent[c] = p;
  }
  for (const auto& [p, c] : edges) {
    if (p != kTank && parent[p] == kAbsent)
      throw ValidationError("node " + label_str(p) + " has no incoming edge");
  }
  return from_parents(std::move(parent));
}

bool ConfigGraph::contains(Label label) const noexcept {
  return label > 0 && label < static_cast<Label>(parent_.size()) && parent_[label] != kAbsent;
}

Label ConfigGraph::parent(Label node) const {
  if (!contains(node)) throw ValidationError("unknown label " + label_str(node));
  return parent_[node];
}

std::span<const Label> ConfigGraph::children(Label node) const {
  if (node != kTank && !contains(node)) throw ValidationError("unknown label " + label_str(node));
  if (children_.empty()) return {};
  return children_[node];
}

Label ConfigGraph::subtree_min(Label node) const {
  if (node == kTank) return 0;
  if (!contains(node)) throw ValidationError("unknown label " + label_str(node));
  return subtree_min_[node];
}

std::vector<Label> ConfigGraph::preorder() const {
  std::vector<Label> out;
  out.reserve(labels_.size() + 1);
  std::vector<Label> stack{kTank};
  while (!stack.empty()) {
    Label v = stack.back();
    stack.pop_back();
    out.push_back(v);
    auto ch = children(v);
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<Edge> ConfigGraph::edges() const {
  std::vector<Edge> out;
  for (Label v : preorder()) {
    if (v != kTank) out.emplace_back(parent_[v], v);
  }
  return out;
}

}  // namespace thermoforge::config

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "thermoforge/config_graph.hpp"

namespace thermoforge::config {

enum class EdgeRole {
  kIndependent,  ///< valve-controlled flow, a state of the control problem
  kDependent,    ///< fixed by conservation at a split (last branch in canonical order)
  kPassThrough,  ///< sole outgoing edge of its parent; carries the parent's inflow
};

struct BranchEdge {
  Label parent = kTank;
  Label child = kTank;
  EdgeRole role = EdgeRole::kPassThrough;
  int role_index = -1;  ///< position in the independent or dependent list; -1 for pass-through
};

/// Decomposition of tree-edge flows into independent (controlled) and
/// dependent (conservation-determined) parts.
///
/// Every edge flow is linear in (pump rate, independent flows):
///   edge_flow = edge_pump_coeff * pump + edge_matrix * m_indp.
/// Dependent flows are the affine map m_dp = m_matrix * m_indp + dependent_offset.
struct FlowMap {
  std::vector<BranchEdge> edges;          ///< tree edges in preorder of the child
  std::vector<int> independent_edges;     ///< edge indices, in independent-flow order
  std::vector<int> dependent_edges;       ///< edge indices, in dependent-flow order
  Eigen::MatrixXd m_matrix;               ///< dependent x independent
  Eigen::VectorXd dependent_offset;       ///< kg/s at `pump_rate`
  Eigen::MatrixXd edge_matrix;            ///< edges x independent
  Eigen::VectorXd edge_pump_coeff;        ///< edges; multiplier of the pump rate
  double pump_rate = 0.0;                 ///< kg/s

  [[nodiscard]] int num_independent() const noexcept { return static_cast<int>(independent_edges.size()); }
  [[nodiscard]] int num_dependent() const noexcept { return static_cast<int>(dependent_edges.size()); }
  [[nodiscard]] int num_edges() const noexcept { return static_cast<int>(edges.size()); }

  /// Index into `edges` of the edge entering `child`.
  [[nodiscard]] int edge_into(Label child) const;

  [[nodiscard]] Eigen::VectorXd edge_flows(const Eigen::VectorXd& independent) const;
  [[nodiscard]] Eigen::VectorXd dependent_flows(const Eigen::VectorXd& independent) const;

  /// Independent flows that split every junction's inflow equally among its branches.
  [[nodiscard]] Eigen::VectorXd equal_split() const;

  /// Concatenation in the control-problem order: independent flows first, then dependent.
  [[nodiscard]] Eigen::VectorXd ordered_flows(const Eigen::VectorXd& independent) const;

 private:
  friend FlowMap build_flow_map(const ConfigGraph&, double);
  std::vector<int> edge_of_child_;
};

/// Throws ValidationError if pump_rate is not positive.
FlowMap build_flow_map(const ConfigGraph& graph, double pump_rate);

}  // namespace thermoforge::config

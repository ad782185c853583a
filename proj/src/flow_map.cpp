#include "thermoforge/flow_map.hpp"

#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge::config {

int FlowMap::edge_into(Label child) const {
  if (child <= 0 || child >= static_cast<Label>(edge_of_child_.size()) || edge_of_child_[child] < 0)
    throw ValidationError("no branch edge enters label " + std::to_string(child));
  return edge_of_child_[child];
}

Eigen::VectorXd FlowMap::edge_flows(const Eigen::VectorXd& independent) const {
  return edge_pump_coeff * pump_rate + edge_matrix * independent;
}

Eigen::VectorXd FlowMap::dependent_flows(const Eigen::VectorXd& independent) const {
  return m_matrix * independent + dependent_offset;
}

Eigen::VectorXd FlowMap::ordered_flows(const Eigen::VectorXd& independent) const {
  Eigen::VectorXd out(num_independent() + num_dependent());
  out << independent, dependent_flows(independent);
  return out;
}

Eigen::VectorXd FlowMap::equal_split() const {
  // Walk edges in preorder; a parent's inflow is known before its children.
  Eigen::VectorXd indep = Eigen::VectorXd::Zero(num_independent());
  std::vector<double> inflow(edge_of_child_.size(), 0.0);
  std::vector<int> out_degree(edge_of_child_.size(), 0);
  for (const auto& e : edges) ++out_degree[e.parent];
  for (const auto& e : edges) {
    const double in = e.parent == kTank ? pump_rate : inflow[e.parent];
    const double share = in / out_degree[e.parent];
    inflow[e.child] = share;
    if (e.role == EdgeRole::kIndependent) indep[e.role_index] = share;
  }
  return indep;
}

FlowMap build_flow_map(const ConfigGraph& graph, double pump_rate) {
  if (!(pump_rate > 0.0)) throw ValidationError("pump rate must be positive");
  FlowMap fm;
  fm.pump_rate = pump_rate;
  const auto tree_edges = graph.edges();
  const int n_edges = static_cast<int>(tree_edges.size());
  fm.edge_of_child_.assign(static_cast<std::size_t>(graph.max_label()) + 1, -1);

  // First pass: roles. Preorder guarantees a parent's split is visited in canonical child order.
  for (int i = 0; i < n_edges; ++i) {
    const auto [p, c] = tree_edges[i];
    const auto siblings = graph.children(p);
    BranchEdge be{p, c, EdgeRole::kPassThrough, -1};
    if (siblings.size() >= 2) {
      if (c == siblings.back()) {
        be.role = EdgeRole::kDependent;
        be.role_index = static_cast<int>(fm.dependent_edges.size());
        fm.dependent_edges.push_back(i);
      } else {
        be.role = EdgeRole::kIndependent;
        be.role_index = static_cast<int>(fm.independent_edges.size());
        fm.independent_edges.push_back(i);
      }
    }
    fm.edges.push_back(be);
    fm.edge_of_child_[c] = i;
  }

  // Second pass: linear forms (pump coefficient, independent coefficients) per edge.
  // Siblings are contiguous neither in preorder nor elsewhere, so sum the
  // independent siblings explicitly for each dependent edge.
  const int nf = fm.num_independent();
  fm.edge_matrix = Eigen::MatrixXd::Zero(n_edges, nf);
  fm.edge_pump_coeff = Eigen::VectorXd::Zero(n_edges);
  for (int i = 0; i < n_edges; ++i) {
    const auto& be = fm.edges[i];
    Eigen::RowVectorXd in_m = Eigen::RowVectorXd::Zero(nf);
    double in_p = 1.0;
    if (be.parent != kTank) {
      const int pe = fm.edge_of_child_[be.parent];
      in_m = fm.edge_matrix.row(pe);
      in_p = fm.edge_pump_coeff[pe];
    }
    switch (be.role) {
      case EdgeRole::kPassThrough:
        fm.edge_matrix.row(i) = in_m;
        fm.edge_pump_coeff[i] = in_p;
        break;
      case EdgeRole::kIndependent:
        fm.edge_matrix(i, be.role_index) = 1.0;
        break;
      case EdgeRole::kDependent: {
        Eigen::RowVectorXd row = in_m;
        for (Label s : graph.children(be.parent)) {
          const auto& sib = fm.edges[fm.edge_of_child_[s]];
          if (sib.role == EdgeRole::kIndependent) row[sib.role_index] -= 1.0;
        }
        fm.edge_matrix.row(i) = row;
        fm.edge_pump_coeff[i] = in_p;
        break;
      }
    }
  }

  const int nd = fm.num_dependent();
  fm.m_matrix.resize(nd, nf);
  fm.dependent_offset.resize(nd);
  for (int d = 0; d < nd; ++d) {
    const int e = fm.dependent_edges[d];
    fm.m_matrix.row(d) = fm.edge_matrix.row(e);
    fm.dependent_offset[d] = fm.edge_pump_coeff[e] * pump_rate;
  }
  return fm;
}

}  // namespace thermoforge::config

#include "thermoforge/thermal_model.hpp"

#include <cmath>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge::thermal {

ThermalModel assemble(const PhysicsGraph& pg) {
  ThermalModel m;
  const int n = pg.state_count();
  const int nf = pg.flow_map.num_independent();
  const int sink_col = n;  // T_sink occupies the last column of [T; T_sink]
  m.state_count = n;
  m.independent_count = nf;
  m.params = pg.params;
  m.sink_temperature = pg.params.sink_temperature;
  m.device_labels = pg.device_labels;

  m.capacitance.resize(n);
  for (int i = 0; i < n; ++i) {
    const double c = pg.nodes[i].capacitance;
    if (!(c > 0.0) || !std::isfinite(c))
      throw ValidationError("node " + pg.nodes[i].name + " has non-positive capacitance");
    m.capacitance[i] = c;
    m.node_names.push_back(pg.nodes[i].name);
    m.node_kinds.push_back(pg.nodes[i].kind);
  }
  auto col = [&](int node) { return node == pg.sink ? sink_col : node; };

  // Convection: symmetric weighted Laplacian, scaled row-wise by 1/C.
  m.A = Eigen::MatrixXd::Zero(n, n + 1);
  for (const auto& e : pg.edges) {
    if (e.kind != EdgeKind::kConvection) continue;
    const int a = col(e.tail), b = col(e.head);
    if (a < n) {
      m.A(a, a) -= e.conductance;
      m.A(a, b) += e.conductance;
    }
    if (b < n) {
      m.A(b, b) -= e.conductance;
      m.A(b, a) += e.conductance;
    }
  }
  for (int i = 0; i < n; ++i) m.A.row(i) /= m.capacitance[i];

  std::vector<const PhysicsEdge*> flow_edges;
  for (const auto& e : pg.edges)
    if (e.kind != EdgeKind::kConvection) flow_edges.push_back(&e);
  const int ne = static_cast<int>(flow_edges.size());
  m.B1 = Eigen::MatrixXd::Zero(n, ne);
  m.B2 = Eigen::MatrixXd::Zero(ne, n + 1);
  m.Z = Eigen::MatrixXd::Zero(ne, nf + 2);
  const double cp = pg.params.cp_fluid;
  for (int k = 0; k < ne; ++k) {
    const auto& e = *flow_edges[k];
    const int head = col(e.head), tail = col(e.tail);
    m.B1(head, k) = 1.0 / m.capacitance[head];
    m.B2(k, tail) += cp;
    m.B2(k, head) -= cp;
    switch (e.flow_source) {
      case FlowSource::kBranchEdge:
        m.Z(k, 0) = pg.flow_map.edge_pump_coeff[e.flow_index];
        m.Z.row(k).segment(1, nf) = pg.flow_map.edge_matrix.row(e.flow_index);
        break;
      case FlowSource::kPump: m.Z(k, 0) = 1.0; break;
      case FlowSource::kSink: m.Z(k, nf + 1) = 1.0; break;
      case FlowSource::kNone: throw ValidationError("advective edge without a flow source");
    }
  }

  const int nd = pg.device_count();
  m.D = Eigen::MatrixXd::Zero(n, nd);
  for (int i = 0; i < nd; ++i) {
    const Label l = pg.device_labels[i];
    m.D(pg.wall_node.at(l), i) = 1.0;
    m.wall_nodes.push_back(pg.wall_node.at(l));
    m.fluid_nodes.push_back(pg.fluid_node.at(l));
  }
  m.CinvD = m.capacitance.cwiseInverse().asDiagonal() * m.D;
  return m;
}

Eigen::VectorXd ThermalModel::flow_vector(const Eigen::VectorXd& independent) const {
  Eigen::VectorXd f(independent_count + 2);
  f << params.pump_flow, independent, params.sink_flow;
  return f;
}

void ThermalModel::derivative(const Eigen::VectorXd& T, const Eigen::VectorXd& edge_flow, const Eigen::VectorXd& loads,
                              Eigen::VectorXd& out) const {
  const int n = state_count;
  Eigen::VectorXd x(n + 1);
  x << T, sink_temperature;
  out.noalias() = A * x;
  out.noalias() += B1 * (edge_flow.cwiseProduct(B2 * x));
  out.noalias() += CinvD * loads;
}

Eigen::MatrixXd ThermalModel::state_jacobian(const Eigen::VectorXd& edge_flow) const {
  const int n = state_count;
  return A.leftCols(n) + B1 * edge_flow.asDiagonal() * B2.leftCols(n);
}

Eigen::MatrixXd ThermalModel::flow_jacobian(const Eigen::VectorXd& T) const {
  const int n = state_count;
  Eigen::VectorXd x(n + 1);
  x << T, sink_temperature;
  const Eigen::VectorXd drive = B2 * x;
  return B1 * drive.asDiagonal() * Z.middleCols(1, independent_count);
}

Eigen::MatrixXd ThermalModel::cross_hessian(const Eigen::VectorXd& v) const {
  const int n = state_count;
  const Eigen::VectorXd w = B1.transpose() * v;
  return B2.leftCols(n).transpose() * w.asDiagonal() * Z.middleCols(1, independent_count);
}

namespace {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

BoolMatrix nonzero(const Eigen::MatrixXd& m) { return (m.array() != 0.0).matrix(); }

}  // namespace

BoolMatrix ThermalModel::state_pattern() const {
  const int n = state_count;
  const Eigen::MatrixXd s =
      A.leftCols(n).cwiseAbs() + B1.cwiseAbs() * B2.leftCols(n).cwiseAbs();
  return nonzero(s);
}

BoolMatrix ThermalModel::flow_pattern() const {
  const Eigen::MatrixXd s = B1.cwiseAbs() * Z.middleCols(1, independent_count).cwiseAbs();
  return nonzero(s);
}

BoolMatrix ThermalModel::cross_pattern() const {
  const int n = state_count;
  const Eigen::MatrixXd s = B2.leftCols(n).transpose().cwiseAbs() * Z.middleCols(1, independent_count).cwiseAbs();
  return nonzero(s);
}

Eigen::VectorXd rhs(const ThermalModel& model, const Eigen::VectorXd& T, const Eigen::VectorXd& flows,
                    const Eigen::VectorXd& loads) {
  if (T.size() != model.state_count)
    throw ValidationError("state vector has " + std::to_string(T.size()) + " entries, expected " +
                          std::to_string(model.state_count));
  if (flows.size() != model.independent_count + 2)
    throw ValidationError("flow vector must be [pump; independent; sink] of length " +
                          std::to_string(model.independent_count + 2));
  if (loads.size() != model.device_count())
    throw ValidationError("load vector has " + std::to_string(loads.size()) + " entries, expected " +
                          std::to_string(model.device_count()));
  if (!T.allFinite() || !flows.allFinite() || !loads.allFinite())
    throw ValidationError("non-finite input to rhs");
  if ((flows.array() < 0.0).any()) throw ValidationError("flows must be non-negative");
  Eigen::VectorXd out;
  model.derivative(T, model.edge_flows(flows), loads, out);
  return out;
}

}  // namespace thermoforge::thermal

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "thermoforge/physics_graph.hpp"

namespace thermoforge::thermal {

/// Assembled bilinear state equation
///
///   dT/dt = A [T; T_sink] + B1 diag(Z [m_p; m_f; m_t]) B2 [T; T_sink] + C^-1 D P
///
/// with m_f the independent branch flows. Row e of Z gives the mass flow of
/// power-flow edge e (advective edges, then the sink exchange), B2 row e is
/// cp (e_tail - e_head) and B1 column e is e_head / C_head, so edge e adds
/// m_e cp (T_tail - T_head) / C_head to its receiving node. A holds the
/// convective (Laplacian) part scaled by C^-1.
struct ThermalModel {
  int state_count = 0;        ///< temperature states n
  int independent_count = 0;  ///< N_f
  Eigen::MatrixXd A;          ///< n x (n+1), 1/s
  Eigen::MatrixXd B1;         ///< n x E, 1/(J/K)
  Eigen::MatrixXd B2;         ///< E x (n+1), J/(kg K)
  Eigen::MatrixXd Z;          ///< E x (N_f + 2)
  Eigen::VectorXd capacitance;  ///< diagonal of C, J/K
  Eigen::MatrixXd D;          ///< n x devices, load injection
  Eigen::MatrixXd CinvD;      ///< C^-1 D
  double sink_temperature = 0.0;
  PhysicsParams params;
  std::vector<Label> device_labels;
  std::vector<int> wall_nodes;   ///< per device, ascending label
  std::vector<int> fluid_nodes;  ///< per device, ascending label
  std::vector<std::string> node_names;
  std::vector<NodeKind> node_kinds;

  [[nodiscard]] int edge_count() const noexcept { return static_cast<int>(Z.rows()); }
  [[nodiscard]] int device_count() const noexcept { return static_cast<int>(device_labels.size()); }
  [[nodiscard]] Eigen::MatrixXd C() const { return capacitance.asDiagonal(); }

  /// [pump; independent; sink] with pump and sink flows taken from params.
  [[nodiscard]] Eigen::VectorXd flow_vector(const Eigen::VectorXd& independent) const;

  /// Per-edge mass flows for a flow vector [m_p; m_f; m_t].
  [[nodiscard]] Eigen::VectorXd edge_flows(const Eigen::VectorXd& flows) const { return Z * flows; }

  /// Unchecked right-hand side; `edge_flow` is Z * flows.
  void derivative(const Eigen::VectorXd& T, const Eigen::VectorXd& edge_flow, const Eigen::VectorXd& loads,
                  Eigen::VectorXd& out) const;

  /// d(rhs)/dT for fixed edge flows (n x n).
  [[nodiscard]] Eigen::MatrixXd state_jacobian(const Eigen::VectorXd& edge_flow) const;

  /// d(rhs)/d(m_f) at temperatures T (n x N_f).
  [[nodiscard]] Eigen::MatrixXd flow_jacobian(const Eigen::VectorXd& T) const;

  /// sum_i v_i d^2 rhs_i / dT dm_f (n x N_f); constant in T and flows.
  [[nodiscard]] Eigen::MatrixXd cross_hessian(const Eigen::VectorXd& v) const;

  /// Structural nonzero patterns of state_jacobian and flow_jacobian.
  [[nodiscard]] Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> state_pattern() const;
  [[nodiscard]] Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> flow_pattern() const;
  [[nodiscard]] Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> cross_pattern() const;
};

/// Throws ValidationError on zero or negative capacitance.
ThermalModel assemble(const PhysicsGraph& graph);

/// Checked right-hand side in K/s. `flows` is [m_p; m_f; m_t] (kg/s, all >= 0),
/// `loads` is W per device in ascending label order.
Eigen::VectorXd rhs(const ThermalModel& model, const Eigen::VectorXd& T, const Eigen::VectorXd& flows,
                    const Eigen::VectorXd& loads);

}  // namespace thermoforge::thermal

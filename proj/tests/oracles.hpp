#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "thermoforge/config_graph.hpp"
#include "thermoforge/oloc.hpp"
#include "thermoforge/physics_graph.hpp"

namespace oracle {

using thermoforge::config::Label;

// Random tree over labels 1..n: each node picks an earlier node (or the tank)
// as parent, then labels are shuffled.
inline thermoforge::config::ConfigGraph random_tree(int n, std::mt19937_64& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<thermoforge::config::Edge> edges;
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i);
    const int p = pick(rng);
    edges.emplace_back(p == 0 ? thermoforge::config::kTank : perm[static_cast<std::size_t>(p - 1)],
                       perm[static_cast<std::size_t>(i)]);
  }
  return thermoforge::config::ConfigGraph::from_edges(edges);
}

// Splits every node's inflow among its children with random positive
// fractions and reads off the independent flows.
inline Eigen::VectorXd random_independent_flows(const thermoforge::thermal::PhysicsGraph& pg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const auto& g = pg.graph;
  const auto& fm = pg.flow_map;
  std::vector<double> edge(static_cast<std::size_t>(fm.num_edges()), 0.0);
  for (auto v : g.preorder()) {
    const double in = v == thermoforge::config::kTank ? fm.pump_rate : edge[static_cast<std::size_t>(fm.edge_into(v))];
    const auto kids = g.children(v);
    std::vector<double> w(kids.size());
    double total = 0.0;
    for (auto& x : w) total += (x = u(rng));
    for (std::size_t i = 0; i < kids.size(); ++i)
      edge[static_cast<std::size_t>(fm.edge_into(kids[i]))] = in * w[i] / total;
  }
  Eigen::VectorXd m(fm.num_independent());
  for (int k = 0; k < m.size(); ++k)
    m[k] = edge[static_cast<std::size_t>(fm.independent_edges[static_cast<std::size_t>(k)])];
  return m;
}

inline Eigen::VectorXd random_temperatures(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(10.0, 50.0);
  Eigen::VectorXd T(n);
  for (int i = 0; i < n; ++i) T[i] = u(rng);
  return T;
}

inline std::map<Label, double> random_loads(const thermoforge::config::ConfigGraph& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 12000.0);
  std::map<Label, double> l;
  for (auto v : g.labels()) l[v] = u(rng);
  return l;
}

inline Eigen::VectorXd load_vector(const std::map<Label, double>& l) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(l.size()));
  Eigen::Index i = 0;
  for (const auto& [k, w] : l) v[i++] = w;
  return v;
}

struct Balance {
  Eigen::VectorXd rate;   // K/s
  Eigen::VectorXd scale;  // sum of absolute term magnitudes, K/s
};

// Per-node heat balance summed edge by edge over the physics graph.
inline Balance node_balance(const thermoforge::thermal::PhysicsGraph& pg, const Eigen::VectorXd& T,
                            const Eigen::VectorXd& m_indp, const std::map<Label, double>& load_w) {
  using thermoforge::thermal::EdgeKind;
  using thermoforge::thermal::FlowSource;
  const int n = pg.state_count();
  const auto& p = pg.params;
  const Eigen::VectorXd branch = pg.flow_map.edge_flows(m_indp);
  auto temp = [&](int node) { return node == pg.sink ? p.sink_temperature : T[node]; };
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n), s = Eigen::VectorXd::Zero(n);
  auto add = [&](int node, double w) {
    if (node == pg.sink) return;
    q[node] += w;
    s[node] += std::abs(w);
  };
  for (const auto& e : pg.edges) {
    if (e.kind == EdgeKind::kConvection) {
      const double w = e.conductance * (temp(e.tail) - temp(e.head));
      add(e.head, w);
      add(e.tail, -w);
    } else {
      double flow = 0.0;
      if (e.flow_source == FlowSource::kBranchEdge) flow = branch[e.flow_index];
      if (e.flow_source == FlowSource::kPump) flow = p.pump_flow;
      if (e.flow_source == FlowSource::kSink) flow = p.sink_flow;
      add(e.head, flow * p.cp_fluid * (temp(e.tail) - temp(e.head)));
    }
  }
  for (const auto& [label, w] : load_w) add(pg.wall_node.at(label), w);
  Balance b{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const double c = pg.nodes[static_cast<std::size_t>(i)].capacitance;
    b.rate[i] = q[i] / c;
    b.scale[i] = s[i] / c;
  }
  return b;
}

struct DerivativeErrors {
  double gradient = 0.0;
  double jacobian = 0.0;
  double hessian = 0.0;
  bool lower_triangle = true;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

inline Eigen::MatrixXd dense_jacobian(const thermoforge::nlp::NlpProblem& nlp, const Eigen::VectorXd& x) {
  const auto s = nlp.jacobian_structure();
  Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
  nlp.jacobian_values(x, v);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nlp.num_constraints(), nlp.num_variables());
  for (std::size_t k = 0; k < s.size(); ++k) J(s[k].first, s[k].second) += v[static_cast<Eigen::Index>(k)];
  return J;
}

// Worst relative disagreement of the analytic gradient, constraint Jacobian
// and Lagrangian Hessian with central differences at a random interior point.
inline DerivativeErrors check_derivatives(const thermoforge::nlp::NlpProblem& nlp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int nv = nlp.num_variables(), nc = nlp.num_constraints();
  Eigen::VectorXd xl(nv), xu(nv), gl(nc), gu(nc);
  nlp.bounds(xl, xu, gl, gu);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  Eigen::VectorXd x(nv);
  for (int i = 0; i < nv; ++i) {
    const double lo = std::max(xl[i], -1.0), hi = std::min(xu[i], 1.0);
    x[i] = lo + u(rng) * (hi - lo);
  }
  x[0] = 0.5 + u(rng);

  DerivativeErrors out;
  const double eps = 1e-6, sigma = 0.7;
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd lambda(nc);
  for (int i = 0; i < nc; ++i) lambda[i] = g(rng);

  Eigen::VectorXd grad;
  nlp.gradient(x, grad);
  const Eigen::MatrixXd J = dense_jacobian(nlp, x);
  const auto hs = nlp.hessian_structure();
  Eigen::VectorXd hv(static_cast<Eigen::Index>(hs.size()));
  nlp.hessian_values(x, sigma, lambda, hv);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nv, nv);
  for (std::size_t k = 0; k < hs.size(); ++k) {
    const auto [i, j] = hs[k];
    if (i < j) out.lower_triangle = false;
    H(i, j) += hv[static_cast<Eigen::Index>(k)];
    if (i != j) H(j, i) += hv[static_cast<Eigen::Index>(k)];
  }
  auto lagrangian_gradient = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd gy;
    nlp.gradient(y, gy);
    return Eigen::VectorXd(sigma * gy + dense_jacobian(nlp, y).transpose() * lambda);
  };
  for (int j = 0; j < nv; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += eps;
    xm[j] -= eps;
    out.gradient = std::max(out.gradient, rel_err(grad[j], (nlp.objective(xp) - nlp.objective(xm)) / (2 * eps)));
    Eigen::VectorXd cp, cm;
    nlp.constraints(xp, cp);
    nlp.constraints(xm, cm);
    const Eigen::VectorXd fd = (cp - cm) / (2 * eps);
    for (int i = 0; i < nc; ++i) out.jacobian = std::max(out.jacobian, rel_err(J(i, j), fd[i]));
    const Eigen::VectorXd hd = (lagrangian_gradient(xp) - lagrangian_gradient(xm)) / (2 * eps);
    for (int i = 0; i < nv; ++i) out.hessian = std::max(out.hessian, rel_err(H(i, j), hd[i]));
  }
  return out;
}

}  // namespace oracle

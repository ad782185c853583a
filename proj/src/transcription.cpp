#include <cmath>
#include <string>

#include "thermoforge/errors.hpp"
#include "thermoforge/oloc.hpp"

namespace thermoforge::oloc {

using Eigen::VectorXd;

Transcription::Transcription(OlocProblem problem, int segments, Scheme scheme, double time_ref)
    : problem_(std::move(problem)), segments_(segments), scheme_(scheme), time_ref_(time_ref) {
  if (segments_ < 2) throw ValidationError("transcription needs at least 2 segments");
  if (!(time_ref_ > 0.0) || !std::isfinite(time_ref_)) throw ValidationError("time reference must be positive");
  const auto& model = problem_.model;
  const auto& opt = problem_.options;
  n_ = problem_.temperature_count();
  nf_ = problem_.control_count();
  ndep_ = problem_.flow_map.num_dependent();
  t_base_ = model.sink_temperature;
  t_span_ = opt.temperature_max - t_base_;
  if (!(t_span_ > 0.0)) throw ValidationError("temperature bound must exceed the sink temperature");
  m_scale_ = model.params.pump_flow;
  u_scale_ = opt.flow_rate_limit;
  lambda_hat_ = problem_.penalty_weight * u_scale_ * u_scale_;
  h_ = 1.0 / segments_;

  if (scheme_ == Scheme::kTrapezoidal) {
    points_ = segments_ + 1;
    for (int j = 0; j < points_; ++j) grid_.push_back(j * h_);
    weights_.assign(static_cast<std::size_t>(points_), h_);
    weights_.front() = weights_.back() = 0.5 * h_;
    for (int k = 0; k < segments_; ++k) {
      Block b;
      b.count = 2;
      b.points[0] = k;
      b.points[1] = k + 1;
      b.a[0] = -1.0;
      b.a[1] = 1.0;
      b.b[0] = b.b[1] = 0.5;
      blocks_.push_back(b);
    }
  } else {
    points_ = 2 * segments_ + 1;
    for (int j = 0; j < points_; ++j) grid_.push_back(0.5 * j * h_);
    weights_.assign(static_cast<std::size_t>(points_), 0.0);
    for (int k = 0; k < segments_; ++k) {
      const int p0 = 2 * k;
      weights_[static_cast<std::size_t>(p0)] += h_ / 6.0;
      weights_[static_cast<std::size_t>(p0 + 1)] += 4.0 * h_ / 6.0;
      weights_[static_cast<std::size_t>(p0 + 2)] += h_ / 6.0;
      Block interp;
      interp.count = 3;
      Block simpson;
      simpson.count = 3;
      for (int c = 0; c < 3; ++c) interp.points[c] = simpson.points[c] = p0 + c;
      interp.a[0] = -0.5;
      interp.a[1] = 1.0;
      interp.a[2] = -0.5;
      interp.b[0] = 0.125;
      interp.b[2] = -0.125;
      simpson.a[0] = -1.0;
      simpson.a[2] = 1.0;
      simpson.b[0] = 1.0 / 6.0;
      simpson.b[1] = 4.0 / 6.0;
      simpson.b[2] = 1.0 / 6.0;
      blocks_.push_back(interp);
      blocks_.push_back(simpson);
    }
  }
  grid_.back() = 1.0;

  row_initial_ = defect_count();
  row_pinned_ = row_initial_ + n_;
  row_path_ = row_pinned_ + (opt.free_initial_flow ? 0 : nf_);
  rows_ = row_path_ + points_ * ndep_;

  initial_scaled_ = (problem_.initial_temperature.array() - t_base_) / t_span_;
  pinned_scaled_ = problem_.flow_map.equal_split() / m_scale_;

  const auto sp = model.state_pattern();
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i)
      if (sp(i, j) || i == j) state_nz_.emplace_back(i, j);
  if (nf_ > 0) {
    const auto fp = model.flow_pattern();
    const auto cp = model.cross_pattern();
    for (int k = 0; k < nf_; ++k)
      for (int i = 0; i < n_; ++i) {
        if (fp(i, k)) flow_nz_.emplace_back(i, k);
        if (cp(i, k)) cross_nz_.emplace_back(i, k);
      }
    const auto& M = problem_.flow_map.m_matrix;
    for (int d = 0; d < ndep_; ++d)
      for (int k = 0; k < nf_; ++k)
        if (M(d, k) != 0.0) dep_nz_.emplace_back(d, k);
  }
}

int Transcription::num_variables() const { return 1 + points_ * point_size(); }
int Transcription::num_constraints() const { return rows_; }

VectorXd Transcription::physical_temperature(const VectorXd& x, int p) const {
  return t_base_ + t_span_ * x.segment(temperature_index(p, 0), n_).array();
}

VectorXd Transcription::flow_vector(const VectorXd& x, int p) const {
  VectorXd indep = nf_ > 0 ? VectorXd(m_scale_ * x.segment(flow_index(p, 0), nf_)) : VectorXd();
  return problem_.model.flow_vector(indep);
}

const VectorXd& Transcription::load_at(const VectorXd& x, int p) const {
  return problem_.loads.value(final_time(x) * grid_[static_cast<std::size_t>(p)]);
}

Transcription::PointEval Transcription::eval_point(const VectorXd& x, int p) const {
  PointEval e;
  const auto& model = problem_.model;
  e.edge_flow = model.edge_flows(flow_vector(x, p));
  VectorXd dT;
  model.derivative(physical_temperature(x, p), e.edge_flow, load_at(x, p), dT);
  e.rhs.resize(n_ + nf_);
  e.rhs.head(n_) = dT / t_span_;
  if (nf_ > 0) e.rhs.tail(nf_) = (u_scale_ / m_scale_) * x.segment(control_index(p, 0), nf_);
  return e;
}

VectorXd Transcription::temperatures(const VectorXd& x, int point) const { return physical_temperature(x, point); }

VectorXd Transcription::flows(const VectorXd& x, int point) const {
  return nf_ > 0 ? VectorXd(m_scale_ * x.segment(flow_index(point, 0), nf_)) : VectorXd();
}

VectorXd Transcription::controls(const VectorXd& x, int point) const {
  return nf_ > 0 ? VectorXd(u_scale_ * x.segment(control_index(point, 0), nf_)) : VectorXd();
}

double Transcription::penalty(const VectorXd& x) const {
  double q = 0.0;
  for (int p = 0; p < points_; ++p)
    if (nf_ > 0) q += weights_[static_cast<std::size_t>(p)] * x.segment(control_index(p, 0), nf_).squaredNorm();
  return time_ref_ * lambda_hat_ * x[0] * q;
}

VectorXd Transcription::pack(double t_f, const std::vector<VectorXd>& temperatures, const std::vector<VectorXd>& flows,
                             const std::vector<VectorXd>& controls) const {
  const auto np = static_cast<std::size_t>(points_);
  if (temperatures.size() != np || flows.size() != np || controls.size() != np)
    throw ValidationError("pack needs one entry per grid point");
  VectorXd x(num_variables());
  x[0] = t_f / time_ref_;
  for (int p = 0; p < points_; ++p) {
    const auto u = static_cast<std::size_t>(p);
    x.segment(temperature_index(p, 0), n_) = (temperatures[u].array() - t_base_) / t_span_;
    if (nf_ > 0) {
      x.segment(flow_index(p, 0), nf_) = flows[u] / m_scale_;
      x.segment(control_index(p, 0), nf_) = controls[u] / u_scale_;
    }
  }
  return x;
}

void Transcription::bounds(VectorXd& xl, VectorXd& xu, VectorXd& gl, VectorXd& gu) const {
  const auto& opt = problem_.options;
  xl.setConstant(num_variables(), -2.0 * nlp::kInfinity);
  xu.setConstant(num_variables(), 2.0 * nlp::kInfinity);
  xl[0] = opt.tf_min / time_ref_;
  xu[0] = opt.tf_max / time_ref_;
  for (int p = 0; p < points_; ++p) {
    xu.segment(temperature_index(p, 0), n_).setOnes();
    if (nf_ > 0) {
      xl.segment(flow_index(p, 0), nf_).setZero();
      xu.segment(flow_index(p, 0), nf_).setOnes();
      xl.segment(control_index(p, 0), nf_).setConstant(-1.0);
      xu.segment(control_index(p, 0), nf_).setOnes();
    }
  }
  gl.setZero(rows_);
  gu.setZero(rows_);
  gl.segment(row_initial_, n_) = initial_scaled_;
  gu.segment(row_initial_, n_) = initial_scaled_;
  if (!opt.free_initial_flow && nf_ > 0) {
    gl.segment(row_pinned_, nf_) = pinned_scaled_;
    gu.segment(row_pinned_, nf_) = pinned_scaled_;
  }
  const VectorXd off = problem_.flow_map.dependent_offset / m_scale_;
  for (int p = 0; p < points_; ++p)
    for (int d = 0; d < ndep_; ++d) {
      gl[row_path_ + p * ndep_ + d] = -off[d];
      gu[row_path_ + p * ndep_ + d] = 1.0 - off[d];
    }
}

double Transcription::objective(const VectorXd& x) const {
  double q = 0.0;
  if (nf_ > 0)
    for (int p = 0; p < points_; ++p)
      q += weights_[static_cast<std::size_t>(p)] * x.segment(control_index(p, 0), nf_).squaredNorm();
  return -x[0] + lambda_hat_ * x[0] * q;
}

void Transcription::gradient(const VectorXd& x, VectorXd& grad) const {
  grad.setZero(num_variables());
  double q = 0.0;
  for (int p = 0; p < points_ && nf_ > 0; ++p) {
    const double w = weights_[static_cast<std::size_t>(p)];
    const auto u = x.segment(control_index(p, 0), nf_);
    q += w * u.squaredNorm();
    grad.segment(control_index(p, 0), nf_) = 2.0 * lambda_hat_ * x[0] * w * u;
  }
  grad[0] = -1.0 + lambda_hat_ * q;
}

void Transcription::constraints(const VectorXd& x, VectorXd& g) const {
  g.resize(rows_);
  const int ds = n_ + nf_;
  std::vector<VectorXd> rhs(static_cast<std::size_t>(points_));
  for (int p = 0; p < points_; ++p) rhs[static_cast<std::size_t>(p)] = eval_point(x, p).rhs;
  const double scale = x[0] * time_ref_ * h_;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    auto row = g.segment(static_cast<Eigen::Index>(k) * ds, ds);
    row.setZero();
    for (int c = 0; c < b.count; ++c) {
      const int p = b.points[c];
      if (b.a[c] != 0.0) row += b.a[c] * x.segment(temperature_index(p, 0), ds);
      if (b.b[c] != 0.0) row -= scale * b.b[c] * rhs[static_cast<std::size_t>(p)];
    }
  }
  g.segment(row_initial_, n_) = x.segment(temperature_index(0, 0), n_);
  if (!problem_.options.free_initial_flow && nf_ > 0) g.segment(row_pinned_, nf_) = x.segment(flow_index(0, 0), nf_);
  if (ndep_ > 0) {
    const auto& M = problem_.flow_map.m_matrix;
    for (int p = 0; p < points_; ++p) g.segment(row_path_ + p * ndep_, ndep_) = M * x.segment(flow_index(p, 0), nf_);
  }
}

nlp::NlpProblem::Coordinates Transcription::jacobian_structure() const {
  Coordinates c;
  const int ds = n_ + nf_;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const int rb = static_cast<int>(k) * ds;
    for (int r = 0; r < ds; ++r) c.emplace_back(rb + r, 0);
    for (int cc = 0; cc < b.count; ++cc) {
      const int p = b.points[cc];
      if (b.a[cc] != 0.0)
        for (int r = 0; r < ds; ++r) c.emplace_back(rb + r, temperature_index(p, r));
      if (b.b[cc] != 0.0) {
        for (auto [i, j] : state_nz_) c.emplace_back(rb + i, temperature_index(p, j));
        for (auto [i, q] : flow_nz_) c.emplace_back(rb + i, flow_index(p, q));
        for (int q = 0; q < nf_; ++q) c.emplace_back(rb + n_ + q, control_index(p, q));
      }
    }
  }
  for (int i = 0; i < n_; ++i) c.emplace_back(row_initial_ + i, temperature_index(0, i));
  if (!problem_.options.free_initial_flow)
    for (int q = 0; q < nf_; ++q) c.emplace_back(row_pinned_ + q, flow_index(0, q));
  for (int p = 0; p < points_; ++p)
    for (auto [d, q] : dep_nz_) c.emplace_back(row_path_ + p * ndep_ + d, flow_index(p, q));
  return c;
}

void Transcription::jacobian_values(const VectorXd& x, VectorXd& values) const {
  const auto& model = problem_.model;
  const int ds = n_ + nf_;
  std::vector<PointEval> ev(static_cast<std::size_t>(points_));
  std::vector<Eigen::MatrixXd> sj(static_cast<std::size_t>(points_)), fj(static_cast<std::size_t>(points_));
  for (int p = 0; p < points_; ++p) {
    const auto u = static_cast<std::size_t>(p);
    ev[u] = eval_point(x, p);
    sj[u] = model.state_jacobian(ev[u].edge_flow);
    if (nf_ > 0) fj[u] = model.flow_jacobian(physical_temperature(x, p)) * (m_scale_ / t_span_);
  }
  const double tau = x[0];
  const double rho = u_scale_ / m_scale_;
  Eigen::Index k = 0;
  for (const Block& b : blocks_) {
    for (int r = 0; r < ds; ++r) {
      double v = 0.0;
      for (int cc = 0; cc < b.count; ++cc)
        if (b.b[cc] != 0.0) v -= time_ref_ * h_ * b.b[cc] * ev[static_cast<std::size_t>(b.points[cc])].rhs[r];
      values[k++] = v;
    }
    for (int cc = 0; cc < b.count; ++cc) {
      const auto u = static_cast<std::size_t>(b.points[cc]);
      if (b.a[cc] != 0.0)
        for (int r = 0; r < ds; ++r) values[k++] = b.a[cc];
      if (b.b[cc] != 0.0) {
        const double coef = -tau * time_ref_ * h_ * b.b[cc];
        for (auto [i, j] : state_nz_) values[k++] = coef * sj[u](i, j);
        for (auto [i, q] : flow_nz_) values[k++] = coef * fj[u](i, q);
        for (int q = 0; q < nf_; ++q) values[k++] = coef * rho;
      }
    }
  }
  for (int i = 0; i < n_; ++i) values[k++] = 1.0;
  if (!problem_.options.free_initial_flow)
    for (int q = 0; q < nf_; ++q) values[k++] = 1.0;
  const auto& M = problem_.flow_map.m_matrix;
  for (int p = 0; p < points_; ++p)
    for (auto [d, q] : dep_nz_) values[k++] = M(d, q);
}

nlp::NlpProblem::Coordinates Transcription::hessian_structure() const {
  Coordinates c;
  for (int p = 0; p < points_; ++p) {
    for (int i = 0; i < n_; ++i) c.emplace_back(temperature_index(p, i), 0);
    for (int q = 0; q < nf_; ++q) c.emplace_back(flow_index(p, q), 0);
    for (int q = 0; q < nf_; ++q) c.emplace_back(control_index(p, q), 0);
    for (auto [i, q] : cross_nz_) c.emplace_back(flow_index(p, q), temperature_index(p, i));
    for (int q = 0; q < nf_; ++q) c.emplace_back(control_index(p, q), control_index(p, q));
  }
  return c;
}

void Transcription::hessian_values(const VectorXd& x, double sigma, const VectorXd& lambda, VectorXd& values) const {
  const auto& model = problem_.model;
  const int ds = n_ + nf_;
  // Per-point sum of the defect multipliers weighted by their rhs coefficients.
  std::vector<VectorXd> wsum(static_cast<std::size_t>(points_), VectorXd::Zero(ds));
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const auto v = lambda.segment(static_cast<Eigen::Index>(k) * ds, ds);
    for (int cc = 0; cc < b.count; ++cc)
      if (b.b[cc] != 0.0) wsum[static_cast<std::size_t>(b.points[cc])] += b.b[cc] * v;
  }
  const double kappa = -time_ref_ * h_;
  const double tau = x[0];
  const double rho = u_scale_ / m_scale_;
  Eigen::Index k = 0;
  for (int p = 0; p < points_; ++p) {
    const auto u = static_cast<std::size_t>(p);
    const VectorXd wt = wsum[u].head(n_);
    const VectorXd edge = model.edge_flows(flow_vector(x, p));
    const VectorXd st = model.state_jacobian(edge).transpose() * wt;
    for (int i = 0; i < n_; ++i) values[k++] = kappa * st[i];
    if (nf_ > 0) {
      const VectorXd ft =
          model.flow_jacobian(physical_temperature(x, p)).transpose() * wt * (m_scale_ / t_span_);
      for (int q = 0; q < nf_; ++q) values[k++] = kappa * ft[q];
      const double w = weights_[u];
      for (int q = 0; q < nf_; ++q)
        values[k++] = kappa * rho * wsum[u][n_ + q] + sigma * 2.0 * lambda_hat_ * w * x[control_index(p, q)];
      const Eigen::MatrixXd ch = model.cross_hessian(wt);
      for (auto [i, q] : cross_nz_) values[k++] = kappa * tau * m_scale_ * ch(i, q);
      for (int q = 0; q < nf_; ++q) values[k++] = sigma * 2.0 * lambda_hat_ * tau * w;
    }
  }
}

Transcription transcribe(const OlocProblem& problem, int segments, Scheme scheme, double time_ref) {
  return Transcription(problem, segments, scheme, time_ref);
}

}  // namespace thermoforge::oloc

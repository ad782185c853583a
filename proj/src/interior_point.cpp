#include "thermoforge/interior_point.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "thermoforge/errors.hpp"

namespace thermoforge::nlp {

std::string to_string(IpmStatus s) {
  switch (s) {
    case IpmStatus::kSolved: return "solved";
    case IpmStatus::kAcceptable: return "solved to acceptable level";
    case IpmStatus::kMaxIterations: return "maximum iterations reached";
    case IpmStatus::kLineSearchFailure: return "line search failure";
    case IpmStatus::kNumericalFailure: return "numerical failure";
  }
  return "unknown";
}

namespace {

using Eigen::VectorXd;
using Sparse = Eigen::SparseMatrix<double>;

constexpr double kKappaEps = 10.0;
constexpr double kKappaMu = 0.2;
constexpr double kThetaMu = 1.5;
constexpr double kTauMin = 0.99;
constexpr double kKappaSigma = 1e10;
constexpr double kDamping = 1e-5;
constexpr double kArmijo = 1e-4;
constexpr double kSMax = 100.0;
constexpr double kDeltaC = 1e-9;
constexpr double kEps = std::numeric_limits<double>::epsilon();

bool finite_bound(double b) { return std::abs(b) < kInfinity; }

// Compressed sparse matrix whose pattern is fixed at construction; `pos[k]`
// is the storage slot of the k-th coordinate handed in.
struct FrozenPattern {
  Sparse mat;
  std::vector<int> pos;

  FrozenPattern() = default;
  FrozenPattern(int rows, int cols, const std::vector<std::pair<int, int>>& coords) : mat(rows, cols) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(coords.size());
    for (auto [r, c] : coords) trip.emplace_back(r, c, 0.0);
    mat.setFromTriplets(trip.begin(), trip.end());
    mat.makeCompressed();
    pos.reserve(coords.size());
    for (auto [r, c] : coords) pos.push_back(static_cast<int>(&mat.coeffRef(r, c) - mat.valuePtr()));
  }
  void clear() { std::fill(mat.valuePtr(), mat.valuePtr() + mat.nonZeros(), 0.0); }
  void add(int k, double v) { mat.valuePtr()[pos[static_cast<std::size_t>(k)]] += v; }
};

class Solver {
 public:
  Solver(const NlpProblem& p, const IpmOptions& o) : p_(p), o_(o) {}

  IpmResult run(const VectorXd& x0);

 private:
  void setup();
  void initial_point(const VectorXd& x0);
  bool eval_c(const VectorXd& w, VectorXd& c) const;
  void eval_derivatives();
  [[nodiscard]] double barrier_value(const VectorXd& w) const;
  [[nodiscard]] VectorXd barrier_gradient() const;
  [[nodiscard]] VectorXd jwt(const VectorXd& l) const;
  bool factorize(double min_delta_w);
  void solve_kkt(const VectorXd& rhs, VectorXd& sol);
  [[nodiscard]] double step_to_boundary(const VectorXd& v, const VectorXd& dv, const VectorXd& lo,
                                        const VectorXd& hi, const std::vector<char>& has_lo,
                                        const std::vector<char>& has_hi) const;
  void log_iteration(int iter, double inf_pr, double inf_du, double alpha) const;

  const NlpProblem& p_;
  IpmOptions o_;
  int nx_ = 0, m_ = 0, ns_ = 0, nw_ = 0;
  std::vector<int> ineq_;     // constraint row of each slack
  std::vector<int> slack_of_; // slack index of each row, -1 for equalities
  VectorXd lo_, hi_, gl_, gu_;
  std::vector<char> has_lo_, has_hi_;
  std::vector<std::pair<int, int>> jac_coords_, hess_coords_;
  FrozenPattern jac_;
  FrozenPattern kkt_;
  std::size_t kkt_hess_ = 0, kkt_jac_ = 0, kkt_slack_ = 0, kkt_diag_ = 0, kkt_cdiag_ = 0;
  Eigen::SimplicialLDLT<Sparse, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  bool analyzed_ = false;
  double delta_w_last_ = 0.0;
  double delta_w_ = 0.0;

  // iterate
  VectorXd w_, lam_, zl_, zu_;
  double f_ = 0.0;
  VectorXd c_, grad_, jac_values_, hess_values_, sigma_;
  double mu_ = 0.1;
};

void Solver::setup() {
  nx_ = p_.num_variables();
  m_ = p_.num_constraints();
  VectorXd xl(nx_), xu(nx_), gl(m_), gu(m_);
  p_.bounds(xl, xu, gl, gu);
  gl_ = gl;
  gu_ = gu;
  slack_of_.assign(static_cast<std::size_t>(m_), -1);
  for (int i = 0; i < m_; ++i) {
    if (gl[i] > gu[i]) throw ValidationError("constraint " + std::to_string(i) + " has lower bound above upper bound");
    if (finite_bound(gl[i]) && finite_bound(gu[i]) && gl[i] == gu[i]) continue;
    slack_of_[static_cast<std::size_t>(i)] = static_cast<int>(ineq_.size());
    ineq_.push_back(i);
  }
  ns_ = static_cast<int>(ineq_.size());
  nw_ = nx_ + ns_;
  lo_.resize(nw_);
  hi_.resize(nw_);
  lo_.head(nx_) = xl;
  hi_.head(nx_) = xu;
  for (int k = 0; k < ns_; ++k) {
    lo_[nx_ + k] = gl[ineq_[static_cast<std::size_t>(k)]];
    hi_[nx_ + k] = gu[ineq_[static_cast<std::size_t>(k)]];
  }
  has_lo_.assign(static_cast<std::size_t>(nw_), 0);
  has_hi_.assign(static_cast<std::size_t>(nw_), 0);
  for (int i = 0; i < nw_; ++i) {
    if (lo_[i] > hi_[i]) throw ValidationError("variable " + std::to_string(i) + " has lower bound above upper bound");
    has_lo_[static_cast<std::size_t>(i)] = finite_bound(lo_[i]);
    has_hi_[static_cast<std::size_t>(i)] = finite_bound(hi_[i]);
    if (has_lo_[static_cast<std::size_t>(i)]) lo_[i] -= o_.bound_relax * std::max(1.0, std::abs(lo_[i]));
    if (has_hi_[static_cast<std::size_t>(i)]) hi_[i] += o_.bound_relax * std::max(1.0, std::abs(hi_[i]));
  }

  jac_coords_ = p_.jacobian_structure();
  for (auto [r, c] : jac_coords_)
    if (r < 0 || r >= m_ || c < 0 || c >= nx_) throw ValidationError("Jacobian coordinate out of range");
  jac_ = FrozenPattern(m_, nx_, jac_coords_);
  hess_coords_ = p_.hessian_structure();
  for (auto& [r, c] : hess_coords_) {
    if (r < 0 || r >= nx_ || c < 0 || c >= nx_) throw ValidationError("Hessian coordinate out of range");
    if (r < c) std::swap(r, c);
  }

  std::vector<std::pair<int, int>> coords;
  coords.reserve(hess_coords_.size() + jac_coords_.size() + static_cast<std::size_t>(2 * nw_ + 2 * m_));
  kkt_hess_ = coords.size();
  coords.insert(coords.end(), hess_coords_.begin(), hess_coords_.end());
  kkt_jac_ = coords.size();
  for (auto [r, c] : jac_coords_) coords.emplace_back(nw_ + r, c);
  kkt_slack_ = coords.size();
  for (int k = 0; k < ns_; ++k) coords.emplace_back(nw_ + ineq_[static_cast<std::size_t>(k)], nx_ + k);
  kkt_diag_ = coords.size();
  for (int i = 0; i < nw_; ++i) coords.emplace_back(i, i);
  kkt_cdiag_ = coords.size();
  for (int i = 0; i < m_; ++i) coords.emplace_back(nw_ + i, nw_ + i);
  kkt_ = FrozenPattern(nw_ + m_, nw_ + m_, coords);

  jac_values_.resize(static_cast<Eigen::Index>(jac_coords_.size()));
  hess_values_.resize(static_cast<Eigen::Index>(hess_coords_.size()));
}

void Solver::initial_point(const VectorXd& x0) {
  w_.resize(nw_);
  w_.head(nx_) = x0;
  VectorXd g(m_);
  p_.constraints(x0, g);
  for (int k = 0; k < ns_; ++k) w_[nx_ + k] = g[ineq_[static_cast<std::size_t>(k)]];
  for (int i = 0; i < nw_; ++i) {
    const bool l = has_lo_[static_cast<std::size_t>(i)], u = has_hi_[static_cast<std::size_t>(i)];
    if (l && u) {
      const double pl = std::min(o_.bound_push * std::max(1.0, std::abs(lo_[i])), o_.bound_frac * (hi_[i] - lo_[i]));
      const double pu = std::min(o_.bound_push * std::max(1.0, std::abs(hi_[i])), o_.bound_frac * (hi_[i] - lo_[i]));
      w_[i] = std::clamp(w_[i], lo_[i] + pl, hi_[i] - pu);
    } else if (l) {
      w_[i] = std::max(w_[i], lo_[i] + o_.bound_push * std::max(1.0, std::abs(lo_[i])));
    } else if (u) {
      w_[i] = std::min(w_[i], hi_[i] - o_.bound_push * std::max(1.0, std::abs(hi_[i])));
    }
  }
  zl_ = VectorXd::Zero(nw_);
  zu_ = VectorXd::Zero(nw_);
  for (int i = 0; i < nw_; ++i) {
    if (has_lo_[static_cast<std::size_t>(i)]) zl_[i] = 1.0;
    if (has_hi_[static_cast<std::size_t>(i)]) zu_[i] = 1.0;
  }
  lam_ = VectorXd::Zero(m_);
}

bool Solver::eval_c(const VectorXd& w, VectorXd& c) const {
  c.resize(m_);
  p_.constraints(w.head(nx_), c);
  for (int i = 0; i < m_; ++i) {
    const int k = slack_of_[static_cast<std::size_t>(i)];
    c[i] -= k >= 0 ? w[nx_ + k] : gl_[i];
  }
  return c.allFinite();
}

void Solver::eval_derivatives() {
  grad_.resize(nx_);
  p_.gradient(w_.head(nx_), grad_);
  p_.jacobian_values(w_.head(nx_), jac_values_);
  jac_.clear();
  for (Eigen::Index k = 0; k < jac_values_.size(); ++k) jac_.add(static_cast<int>(k), jac_values_[k]);
}

double Solver::barrier_value(const VectorXd& w) const {
  double b = 0.0;
  for (int i = 0; i < nw_; ++i) {
    const bool l = has_lo_[static_cast<std::size_t>(i)], u = has_hi_[static_cast<std::size_t>(i)];
    if (l) b -= mu_ * std::log(w[i] - lo_[i]);
    if (u) b -= mu_ * std::log(hi_[i] - w[i]);
    if (l && !u) b += kDamping * mu_ * (w[i] - lo_[i]);
    if (u && !l) b += kDamping * mu_ * (hi_[i] - w[i]);
  }
  return b;
}

VectorXd Solver::barrier_gradient() const {
  VectorXd g = VectorXd::Zero(nw_);
  g.head(nx_) = grad_;
  for (int i = 0; i < nw_; ++i) {
    const bool l = has_lo_[static_cast<std::size_t>(i)], u = has_hi_[static_cast<std::size_t>(i)];
    if (l) g[i] -= mu_ / (w_[i] - lo_[i]);
    if (u) g[i] += mu_ / (hi_[i] - w_[i]);
    if (l && !u) g[i] += kDamping * mu_;
    if (u && !l) g[i] -= kDamping * mu_;
  }
  return g;
}

VectorXd Solver::jwt(const VectorXd& l) const {
  VectorXd r(nw_);
  r.head(nx_) = jac_.mat.transpose() * l;
  for (int k = 0; k < ns_; ++k) r[nx_ + k] = -l[ineq_[static_cast<std::size_t>(k)]];
  return r;
}

// Factorizes the primal-dual matrix, raising the primal regularization until
// the inertia is (nw positive, m negative).
bool Solver::factorize(double min_delta_w) {
  double delta = min_delta_w;
  for (int attempt = 0; attempt < 60; ++attempt) {
    kkt_.clear();
    for (std::size_t k = 0; k < hess_coords_.size(); ++k)
      kkt_.add(static_cast<int>(kkt_hess_ + k), hess_values_[static_cast<Eigen::Index>(k)]);
    for (std::size_t k = 0; k < jac_coords_.size(); ++k)
      kkt_.add(static_cast<int>(kkt_jac_ + k), jac_values_[static_cast<Eigen::Index>(k)]);
    for (int k = 0; k < ns_; ++k) kkt_.add(static_cast<int>(kkt_slack_) + k, -1.0);
    for (int i = 0; i < nw_; ++i) kkt_.add(static_cast<int>(kkt_diag_) + i, sigma_[i] + delta);
    for (int i = 0; i < m_; ++i) kkt_.add(static_cast<int>(kkt_cdiag_) + i, -kDeltaC);
    if (!analyzed_) {
      ldlt_.analyzePattern(kkt_.mat);
      analyzed_ = true;
    }
    ldlt_.factorize(kkt_.mat);
    bool ok = ldlt_.info() == Eigen::Success;
    if (ok) {
      const VectorXd& d = ldlt_.vectorD();
      int pos = 0, neg = 0;
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d[i])) {
          ok = false;
          break;
        }
        if (d[i] > 0) ++pos;
        else if (d[i] < 0) ++neg;
      }
      ok = ok && pos == nw_ && neg == m_;
    }
    if (ok) {
      delta_w_ = delta;
      if (delta > 0) delta_w_last_ = delta;
      return true;
    }
    if (delta == 0.0) delta = delta_w_last_ == 0.0 ? 1e-4 : std::max(1e-20, delta_w_last_ / 3.0);
    else delta *= delta_w_last_ == 0.0 ? 100.0 : 8.0;
    if (delta > 1e40) return false;
  }
  return false;
}

void Solver::solve_kkt(const VectorXd& rhs, VectorXd& sol) {
  sol = ldlt_.solve(rhs);
  // Refine against the system without the dual regularization.
  for (int it = 0; it < 5; ++it) {
    VectorXd prod = kkt_.mat.selfadjointView<Eigen::Lower>() * sol;
    prod.tail(m_) += kDeltaC * sol.tail(m_);
    const VectorXd res = rhs - prod;
    if (res.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
    sol += ldlt_.solve(res);
  }
}

double Solver::step_to_boundary(const VectorXd& v, const VectorXd& dv, const VectorXd& lo, const VectorXd& hi,
                                const std::vector<char>& has_lo, const std::vector<char>& has_hi) const {
  const double tau = std::max(kTauMin, 1.0 - mu_);
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (has_lo[u] && dv[i] < 0) alpha = std::min(alpha, -tau * (v[i] - lo[i]) / dv[i]);
    if (has_hi[u] && dv[i] > 0) alpha = std::min(alpha, tau * (hi[i] - v[i]) / dv[i]);
  }
  return alpha;
}

void Solver::log_iteration(int iter, double inf_pr, double inf_du, double alpha) const {
  if (!o_.verbose) return;
  std::fprintf(stderr, "%4d  f=% .8e  pr=%.2e  du=%.2e  mu=%.1e  dw=%.1e  a=%.2e\n", iter, f_, inf_pr, inf_du, mu_,
               delta_w_, alpha);
}

IpmResult Solver::run(const VectorXd& x0) {
  setup();
  if (x0.size() != nx_) throw ValidationError("initial point has the wrong dimension");
  initial_point(x0);
  mu_ = o_.mu_init;

  IpmResult res;
  auto finish = [&](IpmStatus status, int iter, std::string msg) {
    res.status = status;
    res.x = w_.head(nx_);
    res.lambda = lam_;
    res.z_lower = zl_.head(nx_);
    res.z_upper = zu_.head(nx_);
    res.objective = f_;
    res.iterations = iter;
    res.mu = mu_;
    res.message = std::move(msg);
    VectorXd g(m_);
    p_.constraints(res.x, g);
    double viol = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (finite_bound(gl_[i])) viol = std::max(viol, gl_[i] - g[i]);
      if (finite_bound(gu_[i])) viol = std::max(viol, g[i] - gu_[i]);
    }
    res.constraint_violation = viol;
    return res;
  };

  f_ = p_.objective(w_.head(nx_));
  if (!std::isfinite(f_) || !eval_c(w_, c_)) return finish(IpmStatus::kNumericalFailure, 0, "non-finite values at the starting point");
  eval_derivatives();
  if (!grad_.allFinite() || !jac_values_.allFinite())
    return finish(IpmStatus::kNumericalFailure, 0, "non-finite derivatives at the starting point");

  double nu = 1.0;
  int acceptable_count = 0;
  bool force_mu_decrease = false;
  sigma_.resize(nw_);
  VectorXd sl(nw_), su(nw_);

  for (int iter = 0; iter <= o_.max_iterations; ++iter) {
    for (int i = 0; i < nw_; ++i) {
      sl[i] = has_lo_[static_cast<std::size_t>(i)] ? w_[i] - lo_[i] : 1.0;
      su[i] = has_hi_[static_cast<std::size_t>(i)] ? hi_[i] - w_[i] : 1.0;
    }
    VectorXd gw = VectorXd::Zero(nw_);
    gw.head(nx_) = grad_;
    const VectorXd dual = gw + jwt(lam_) - zl_ + zu_;
    const double z_sum = zl_.lpNorm<1>() + zu_.lpNorm<1>();
    const double s_d = std::max(kSMax, (lam_.lpNorm<1>() + z_sum) / std::max(1, m_ + 2 * nw_)) / kSMax;
    const double s_c = std::max(kSMax, z_sum / std::max(1, 2 * nw_)) / kSMax;
    auto compl_err = [&](double target) {
      double e = 0.0;
      for (int i = 0; i < nw_; ++i) {
        if (has_lo_[static_cast<std::size_t>(i)]) e = std::max(e, std::abs(sl[i] * zl_[i] - target));
        if (has_hi_[static_cast<std::size_t>(i)]) e = std::max(e, std::abs(su[i] * zu_[i] - target));
      }
      return e;
    };
    const double inf_du = dual.lpNorm<Eigen::Infinity>();
    const double inf_pr = m_ > 0 ? c_.lpNorm<Eigen::Infinity>() : 0.0;
    const double err0 = std::max({inf_du / s_d, inf_pr, compl_err(0.0) / s_c});
    res.dual_infeasibility = inf_du;
    res.complementarity = compl_err(0.0);
    if (err0 <= o_.tol && inf_pr <= o_.constraint_tol) return finish(IpmStatus::kSolved, iter, "optimal");
    if (err0 <= o_.acceptable_tol && inf_pr <= o_.constraint_tol) {
      if (++acceptable_count >= o_.acceptable_iterations)
        return finish(IpmStatus::kAcceptable, iter, "acceptable point reached");
    } else {
      acceptable_count = 0;
    }
    if (iter == o_.max_iterations) break;

    // Monotone barrier update.
    for (;;) {
      const double err_mu = std::max({inf_du / s_d, inf_pr, compl_err(mu_) / s_c});
      if (err_mu > kKappaEps * mu_ && !force_mu_decrease) break;
      force_mu_decrease = false;
      const double next = std::max(o_.tol / 10.0, std::min(kKappaMu * mu_, std::pow(mu_, kThetaMu)));
      if (next >= mu_) break;
      mu_ = next;
    }

    p_.hessian_values(w_.head(nx_), 1.0, lam_, hess_values_);
    for (int i = 0; i < nw_; ++i) {
      sigma_[i] = 0.0;
      if (has_lo_[static_cast<std::size_t>(i)]) sigma_[i] += zl_[i] / sl[i];
      if (has_hi_[static_cast<std::size_t>(i)]) sigma_[i] += zu_[i] / su[i];
    }
    const VectorXd gphi = barrier_gradient();
    VectorXd rhs(nw_ + m_);
    rhs.head(nw_) = -(gphi + jwt(lam_));
    rhs.tail(m_) = -c_;

    VectorXd sol, dw, dl;
    double alpha = 0.0;
    bool accepted = false;
    double min_delta = 0.0;
    const double phi0 = f_ + barrier_value(w_);
    const double cn0 = c_.lpNorm<1>();
    VectorXd c_trial;
    double f_trial = 0.0;
    VectorXd w_trial;

    for (int retry = 0; retry < 3 && !accepted; ++retry) {
      if (!factorize(min_delta)) return finish(IpmStatus::kNumericalFailure, iter, "KKT factorization failed");
      solve_kkt(rhs, sol);
      dw = sol.head(nw_);
      dl = sol.tail(m_);
      if (!sol.allFinite()) return finish(IpmStatus::kNumericalFailure, iter, "non-finite search direction");

      const double alpha_max = step_to_boundary(w_, dw, lo_, hi_, has_lo_, has_hi_);
      // Tiny steps: take them and move on to a smaller barrier parameter.
      if (dw.lpNorm<Eigen::Infinity>() <= 10.0 * kEps * (1.0 + w_.lpNorm<Eigen::Infinity>())) {
        alpha = alpha_max;
        w_trial = w_ + alpha * dw;
        f_trial = p_.objective(w_trial.head(nx_));
        eval_c(w_trial, c_trial);
        accepted = true;
        force_mu_decrease = true;
        break;
      }

      const double dphi = gphi.dot(dw);
      if (cn0 > 1e-14) {
        VectorXd padded = VectorXd::Zero(nw_ + m_);
        padded.head(nw_) = dw;
        const VectorXd hd = kkt_.mat.selfadjointView<Eigen::Lower>() * padded;
        const double quad = std::max(0.0, dw.dot(hd.head(nw_)) - delta_w_ * dw.squaredNorm());
        const double nu_req = (dphi + 0.5 * quad) / (0.9 * cn0);
        if (nu < nu_req) nu = nu_req + 1.0;
      }
      const double merit0 = phi0 + nu * cn0;
      const double dmerit = dphi - nu * cn0;
      auto merit_at = [&](const VectorXd& wt, double& ft, VectorXd& ct) {
        ft = p_.objective(wt.head(nx_));
        if (!std::isfinite(ft) || !eval_c(wt, ct)) return std::numeric_limits<double>::infinity();
        const double v = ft + barrier_value(wt) + nu * ct.lpNorm<1>();
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
      };
      const double slackness = 10.0 * kEps * std::abs(merit0);

      alpha = alpha_max;
      for (int bt = 0; bt < 50; ++bt) {
        w_trial = w_ + alpha * dw;
        const double mt = merit_at(w_trial, f_trial, c_trial);
        if (mt <= merit0 + kArmijo * alpha * std::min(dmerit, 0.0) + slackness) {
          accepted = true;
          break;
        }
        if (bt == 0 && m_ > 0 && std::isfinite(mt)) {
          // Second-order correction for the constraint curvature.
          VectorXd rs = VectorXd::Zero(nw_ + m_);
          rs.tail(m_) = -c_trial;
          VectorXd corr;
          solve_kkt(rs, corr);
          VectorXd dsoc = dw + corr.head(nw_);
          const double a_soc = step_to_boundary(w_, dsoc, lo_, hi_, has_lo_, has_hi_);
          VectorXd w_soc = w_ + a_soc * dsoc;
          double f_soc = 0.0;
          VectorXd c_soc;
          const double ms = merit_at(w_soc, f_soc, c_soc);
          if (ms <= merit0 + kArmijo * alpha * std::min(dmerit, 0.0) + slackness) {
            w_trial = w_soc;
            f_trial = f_soc;
            c_trial = c_soc;
            dw = dsoc;
            alpha = a_soc;
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
        if (alpha * dw.lpNorm<Eigen::Infinity>() < 1e-14 * (1.0 + w_.lpNorm<Eigen::Infinity>())) break;
      }
      if (!accepted) min_delta = std::max(1e-4, 10.0 * delta_w_);
    }
    if (!accepted) return finish(IpmStatus::kLineSearchFailure, iter, "no acceptable step along the search direction");

    // Bound multipliers follow the primal step with their own step length.
    VectorXd dzl(nw_), dzu(nw_);
    for (int i = 0; i < nw_; ++i) {
      dzl[i] = has_lo_[static_cast<std::size_t>(i)] ? mu_ / sl[i] - zl_[i] - zl_[i] / sl[i] * dw[i] : 0.0;
      dzu[i] = has_hi_[static_cast<std::size_t>(i)] ? mu_ / su[i] - zu_[i] + zu_[i] / su[i] * dw[i] : 0.0;
    }
    const VectorXd zero = VectorXd::Zero(nw_);
    const std::vector<char> none(static_cast<std::size_t>(nw_), 0);
    const double alpha_z = std::min(step_to_boundary(zl_, dzl, zero, zero, has_lo_, none),
                                    step_to_boundary(zu_, dzu, zero, zero, has_hi_, none));

    w_ = w_trial;
    f_ = f_trial;
    c_ = c_trial;
    lam_ += alpha * dl;
    zl_ += alpha_z * dzl;
    zu_ += alpha_z * dzu;
    for (int i = 0; i < nw_; ++i) {
      if (has_lo_[static_cast<std::size_t>(i)]) {
        const double s = w_[i] - lo_[i];
        zl_[i] = std::clamp(zl_[i], mu_ / (kKappaSigma * s), kKappaSigma * mu_ / s);
      }
      if (has_hi_[static_cast<std::size_t>(i)]) {
        const double s = hi_[i] - w_[i];
        zu_[i] = std::clamp(zu_[i], mu_ / (kKappaSigma * s), kKappaSigma * mu_ / s);
      }
    }
    eval_derivatives();
    if (!grad_.allFinite() || !jac_values_.allFinite())
      return finish(IpmStatus::kNumericalFailure, iter + 1, "non-finite derivatives");
    log_iteration(iter, inf_pr, inf_du, alpha);
  }
  return finish(IpmStatus::kMaxIterations, o_.max_iterations, "iteration limit");
}

}  // namespace

IpmResult minimize(const NlpProblem& problem, const VectorXd& x0, const IpmOptions& options) {
  Solver s(problem, options);
  return s.run(x0);
}

}  // namespace thermoforge::nlp

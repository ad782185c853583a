#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace thermoforge::nlp {

/// Bounds with magnitude at or above this are treated as absent.
constexpr double kInfinity = 1e19;

/// Smooth nonlinear program
///
///   min f(x)  s.t.  g_lower <= g(x) <= g_upper,  x_lower <= x <= x_upper.
///
/// Sparse derivatives are exposed as a fixed list of (row, col) coordinates
/// plus matching value arrays; duplicate coordinates are summed. The
/// Hessian covers the lower triangle of sigma * d2f + sum_i lambda_i d2g_i
/// (an upper-triangle coordinate is mirrored).
class NlpProblem {
 public:
  using Coordinates = std::vector<std::pair<int, int>>;

  virtual ~NlpProblem() = default;
  [[nodiscard]] virtual int num_variables() const = 0;
  [[nodiscard]] virtual int num_constraints() const = 0;
  virtual void bounds(Eigen::VectorXd& x_lower, Eigen::VectorXd& x_upper, Eigen::VectorXd& g_lower,
                      Eigen::VectorXd& g_upper) const = 0;
  [[nodiscard]] virtual double objective(const Eigen::VectorXd& x) const = 0;
  virtual void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const = 0;
  virtual void constraints(const Eigen::VectorXd& x, Eigen::VectorXd& g) const = 0;
  [[nodiscard]] virtual Coordinates jacobian_structure() const = 0;
  virtual void jacobian_values(const Eigen::VectorXd& x, Eigen::VectorXd& values) const = 0;
  [[nodiscard]] virtual Coordinates hessian_structure() const = 0;
  virtual void hessian_values(const Eigen::VectorXd& x, double sigma, const Eigen::VectorXd& lambda,
                              Eigen::VectorXd& values) const = 0;
};

struct IpmOptions {
  double tol = 1e-6;             ///< scaled optimality error
  double constraint_tol = 1e-6;  ///< max absolute constraint violation
  double acceptable_tol = 1e-4;
  int acceptable_iterations = 15;
  int max_iterations = 1000;
  double mu_init = 0.1;
  double bound_push = 1e-2;
  double bound_frac = 1e-2;
  double bound_relax = 1e-8;
  bool verbose = false;
};

enum class IpmStatus { kSolved, kAcceptable, kMaxIterations, kLineSearchFailure, kNumericalFailure };

std::string to_string(IpmStatus s);

struct IpmResult {
  IpmStatus status = IpmStatus::kNumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;   ///< constraint multipliers, L = f + lambda' g
  Eigen::VectorXd z_lower;  ///< variable bound multipliers
  Eigen::VectorXd z_upper;
  double objective = 0.0;
  int iterations = 0;
  double constraint_violation = 0.0;  ///< max distance of g(x) from [g_lower, g_upper]
  double dual_infeasibility = 0.0;
  double complementarity = 0.0;
  double mu = 0.0;
  std::string message;

  [[nodiscard]] bool converged() const noexcept {
    return status == IpmStatus::kSolved || status == IpmStatus::kAcceptable;
  }
};

/// Primal-dual barrier method with a filter-free l1 merit line search,
/// second-order correction and inertia-corrected sparse LDL' steps.
/// Inequality constraints get slack variables; equality rows are g_lower == g_upper.
IpmResult minimize(const NlpProblem& problem, const Eigen::VectorXd& x0, const IpmOptions& options = {});

}  // namespace thermoforge::nlp

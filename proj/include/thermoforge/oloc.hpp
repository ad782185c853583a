#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "thermoforge/flow_map.hpp"
#include "thermoforge/interior_point.hpp"
#include "thermoforge/simulate.hpp"
#include "thermoforge/thermal_model.hpp"

namespace thermoforge::oloc {

enum class Scheme { kTrapezoidal, kHermiteSimpson };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct OlocOptions {
  int segments = 50;
  Scheme scheme = Scheme::kTrapezoidal;
  double tol = 1e-6;
  double constraint_tol = 1e-6;
  int max_iterations = 1000;
  double tf_min = 1.0;       ///< s
  double tf_max = 10000.0;   ///< s; also the endurance cap
  double temperature_max = 45.0;
  double wall_init = 20.0;
  double fluid_init = 20.0;
  double loop_init = 15.0;   ///< tank and LLHX nodes
  double flow_rate_limit = 0.05;  ///< |d m_indp / dt| bound, kg/s^2
  double penalty_scale = 0.01;    ///< lambda = penalty_scale / (N_f * flow_rate_limit^2)
  bool free_initial_flow = true;  ///< otherwise m_indp(0) is pinned to the equal split
  int refinement_rounds = 3;      ///< total solves in evaluate_endurance
  double refinement_tol = 0.002;  ///< relative t_end change that ends refinement
  bool verbose = false;

  void validate() const;
};

/// Starts from `base`; unknown keys are rejected.
OlocOptions options_from_json(const nlohmann::json& j, const OlocOptions& base = {});
nlohmann::json to_json(const OlocOptions& o);

/// Variable-final-time flow-control problem for one configuration. The state
/// is [T; m_indp], the control u = d m_indp / dt.
struct OlocProblem {
  thermal::ThermalModel model;
  config::FlowMap flow_map;
  thermal::LoadSchedule loads;
  OlocOptions options;
  Eigen::VectorXd initial_temperature;
  double penalty_weight = 0.0;  ///< lambda; zero without independent flows

  [[nodiscard]] int temperature_count() const noexcept { return model.state_count; }
  [[nodiscard]] int control_count() const noexcept { return flow_map.num_independent(); }
  [[nodiscard]] int state_dim() const noexcept { return temperature_count() + control_count(); }
};

/// With no independent flows the problem still builds; it then has no
/// controls and its optimum is the bound-crossing time.
OlocProblem formulate(const thermal::ThermalModel& model, const config::FlowMap& flow_map,
                      const thermal::LoadSchedule& loads, const OlocOptions& options = {});

/// Direct collocation of an OlocProblem on a uniform grid in normalized time
/// s = t / t_f. Variables are scaled: t_f = t_ref * tau, T = T_sink + dT * That
/// with dT = T_max - T_sink (so That <= 1 is the temperature bound), m = m_p *
/// mhat and u = u_max * uhat.
///
/// Variable order: tau, then per grid point [That (n); mhat (N_f); uhat (N_f)].
/// Constraint order: collocation defects, initial temperatures, pinned
/// initial flows (optional), dependent-flow bounds per grid point.
/// Trapezoidal grids have segments + 1 points; Hermite-Simpson grids add each
/// segment midpoint as a point with its own state and control.
class Transcription : public nlp::NlpProblem {
 public:
  Transcription(OlocProblem problem, int segments, Scheme scheme, double time_ref);

  [[nodiscard]] const OlocProblem& problem() const noexcept { return problem_; }
  [[nodiscard]] int segments() const noexcept { return segments_; }
  [[nodiscard]] Scheme scheme() const noexcept { return scheme_; }
  [[nodiscard]] double time_ref() const noexcept { return time_ref_; }
  [[nodiscard]] int point_count() const noexcept { return points_; }
  [[nodiscard]] int point_size() const noexcept { return n_ + 2 * nf_; }
  /// Rows of the collocation defect block.
  [[nodiscard]] int defect_count() const noexcept { return static_cast<int>(blocks_.size()) * (n_ + nf_); }
  /// Normalized time of each grid point.
  [[nodiscard]] const std::vector<double>& grid() const noexcept { return grid_; }
  /// Quadrature weight of each grid point (sums to one).
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

  [[nodiscard]] int temperature_index(int point, int node) const { return 1 + point * point_size() + node; }
  [[nodiscard]] int flow_index(int point, int k) const { return 1 + point * point_size() + n_ + k; }
  [[nodiscard]] int control_index(int point, int k) const { return 1 + point * point_size() + n_ + nf_ + k; }

  /// Decision vector from physical values (t_f in s, temperatures in deg C,
  /// flows in kg/s, controls in kg/s^2), one entry per grid point.
  [[nodiscard]] Eigen::VectorXd pack(double t_f, const std::vector<Eigen::VectorXd>& temperatures,
                                     const std::vector<Eigen::VectorXd>& flows,
                                     const std::vector<Eigen::VectorXd>& controls) const;
  [[nodiscard]] double final_time(const Eigen::VectorXd& x) const { return time_ref_ * x[0]; }
  [[nodiscard]] Eigen::VectorXd temperatures(const Eigen::VectorXd& x, int point) const;
  [[nodiscard]] Eigen::VectorXd flows(const Eigen::VectorXd& x, int point) const;
  [[nodiscard]] Eigen::VectorXd controls(const Eigen::VectorXd& x, int point) const;
  /// lambda * integral of |u|^2 dt, in s.
  [[nodiscard]] double penalty(const Eigen::VectorXd& x) const;

  int num_variables() const override;
  int num_constraints() const override;
  void bounds(Eigen::VectorXd& x_lower, Eigen::VectorXd& x_upper, Eigen::VectorXd& g_lower,
              Eigen::VectorXd& g_upper) const override;
  double objective(const Eigen::VectorXd& x) const override;
  void gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const override;
  void constraints(const Eigen::VectorXd& x, Eigen::VectorXd& g) const override;
  Coordinates jacobian_structure() const override;
  void jacobian_values(const Eigen::VectorXd& x, Eigen::VectorXd& values) const override;
  Coordinates hessian_structure() const override;
  void hessian_values(const Eigen::VectorXd& x, double sigma, const Eigen::VectorXd& lambda,
                      Eigen::VectorXd& values) const override;

 private:
  struct Block {
    int count = 0;
    int points[3] = {0, 0, 0};
    double a[3] = {0, 0, 0};  ///< state coefficients
    double b[3] = {0, 0, 0};  ///< rhs coefficients, multiplied by t_f * h
  };
  struct PointEval {
    Eigen::VectorXd edge_flow;
    Eigen::VectorXd rhs;  ///< scaled rhs [dThat/dt; dmhat/dt] per unit physical time
  };

  [[nodiscard]] PointEval eval_point(const Eigen::VectorXd& x, int p) const;
  [[nodiscard]] Eigen::VectorXd physical_temperature(const Eigen::VectorXd& x, int p) const;
  [[nodiscard]] Eigen::VectorXd flow_vector(const Eigen::VectorXd& x, int p) const;
  [[nodiscard]] const Eigen::VectorXd& load_at(const Eigen::VectorXd& x, int p) const;

  OlocProblem problem_;
  int segments_ = 0;
  Scheme scheme_ = Scheme::kTrapezoidal;
  double time_ref_ = 1.0;
  int n_ = 0, nf_ = 0, ndep_ = 0;
  int points_ = 0;
  double h_ = 0.0;
  double t_base_ = 0.0, t_span_ = 1.0;  ///< temperature scaling
  double m_scale_ = 1.0, u_scale_ = 1.0;
  double lambda_hat_ = 0.0;  ///< penalty weight in scaled units
  std::vector<double> grid_, weights_;
  std::vector<Block> blocks_;
  int row_initial_ = 0, row_pinned_ = 0, row_path_ = 0, rows_ = 0;
  Eigen::VectorXd initial_scaled_, pinned_scaled_;
  // structural patterns
  std::vector<std::pair<int, int>> state_nz_;  ///< (i, j) of d(rhs_T)/dT, diagonal included
  std::vector<std::pair<int, int>> flow_nz_;   ///< (i, k) of d(rhs_T)/dm
  std::vector<std::pair<int, int>> cross_nz_;  ///< (i, k) of d2(v' rhs_T)/dT dm
  std::vector<std::pair<int, int>> dep_nz_;    ///< (d, k) of the dependent-flow map
};

Transcription transcribe(const OlocProblem& problem, int segments, Scheme scheme, double time_ref);

struct OlocSolution {
  std::string status;
  bool accepted = false;
  double t_end = 0.0;        ///< thermal endurance, s
  double objective = 0.0;    ///< t_end - penalty, s
  double penalty = 0.0;      ///< s
  double penalty_weight = 0.0;
  int segments = 0;
  Scheme scheme = Scheme::kTrapezoidal;
  int iterations = 0;        ///< summed over all solves
  int solves = 0;
  std::vector<double> refinement_history;  ///< t_end per solve
  double max_violation = 0.0;       ///< worst path/defect violation, scaled units
  double resimulation_error = -1.0; ///< K; negative when not computed
  double wall_arrival_spread = 0.0; ///< max |T_w(t_end) - T_max| over loaded walls, K
  double solve_seconds = 0.0;
  std::string message;

  std::vector<double> times;                    ///< s
  std::vector<Eigen::VectorXd> temperatures;    ///< deg C per node
  std::vector<Eigen::VectorXd> independent_flows;
  std::vector<Eigen::VectorXd> dependent_flows;
  std::vector<Eigen::VectorXd> controls;
  Eigen::VectorXd decision;                     ///< raw NLP solution, for warm starts
};

/// Initial guess: equal split held constant, temperatures from a forward
/// simulation sampled on the grid, t_f at the guess's time scale.
Eigen::VectorXd initial_guess(const Transcription& transcription);

/// Forward simulation under the equal split: time at which some node reaches
/// T_max, or nullopt if none does before tf_max.
std::optional<double> equal_split_endurance(const OlocProblem& problem);

/// Solves the transcription (from the default initial guess or `x0`) and
/// applies the penalty rule: if penalty >= 1% of t_end, re-solves once with
/// lambda / 10. Never throws on solver failure; the status says what happened.
OlocSolution solve(const Transcription& transcription);
OlocSolution solve(const Transcription& transcription, const Eigen::VectorXd& x0);

/// formulate, transcribe and solve with segment doubling until t_end changes
/// by less than refinement_tol (at most refinement_rounds solves), then
/// re-simulate the optimal flows as a consistency check.
OlocSolution evaluate_endurance(const thermal::ThermalModel& model, const config::FlowMap& flow_map,
                                const thermal::LoadSchedule& loads, const OlocOptions& options = {});

/// Integrates the model under the solution's flow schedule (linear between
/// grid points) and returns the max final-temperature mismatch in K.
double resimulation_error(const OlocProblem& problem, const OlocSolution& solution);

nlohmann::json summary_json(const OlocSolution& s, const std::string& config);
/// Columns: t_s, one per temperature node, independent flows, dependent
/// flows, controls; flow columns are named by their tree edge.
void write_trajectory_csv(const OlocSolution& s, const thermal::ThermalModel& model, const config::FlowMap& flow_map,
                          std::ostream& out);

}  // namespace thermoforge::oloc

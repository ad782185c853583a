#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "thermoforge/thermal_model.hpp"

namespace thermoforge::thermal {

/// Independent flows as a continuous piecewise-linear function of time
/// (held constant outside the knot range).
class FlowSchedule {
 public:
  FlowSchedule() = default;
  FlowSchedule(std::vector<double> times, std::vector<Eigen::VectorXd> values);
  static FlowSchedule constant(const Eigen::VectorXd& independent);

  [[nodiscard]] Eigen::VectorXd value(double t) const;
  [[nodiscard]] const std::vector<double>& knots() const noexcept { return times_; }

 private:
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> values_;
};

/// Device loads (W, ascending label order), piecewise constant: values[i]
/// applies from times[i] until times[i+1].
class LoadSchedule {
 public:
  LoadSchedule() = default;
  LoadSchedule(std::vector<double> times, std::vector<Eigen::VectorXd> values);
  static LoadSchedule constant(const Eigen::VectorXd& loads);

  [[nodiscard]] const Eigen::VectorXd& value(double t) const;
  [[nodiscard]] const std::vector<double>& knots() const noexcept { return times_; }

 private:
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> values_;
};

struct SimulationOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 1e-3;
  double min_step = 1e-12;
  long max_steps = 2'000'000;
  /// Stop at the first time any temperature reaches this bound; NaN disables.
  double temperature_bound = 45.0;
  /// If non-empty (ascending), the trajectory reports the dense-output state at
  /// each of these times up to the final time, then the final state unless it
  /// coincides with the last requested time.
  std::vector<double> output_times;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::optional<double> event_time;
  int event_node = -1;
  long accepted_steps = 0;
  long rejected_steps = 0;

  [[nodiscard]] const Eigen::VectorXd& final_state() const { return states.back(); }
  [[nodiscard]] double final_time() const { return times.back(); }
};

/// Adaptive Dormand-Prince 5(4) integration of the thermal model from T0 over
/// [0, t_end], stepping exactly onto schedule knots. With a finite temperature
/// bound, integration stops at the first crossing, located on the dense output.
/// Throws StiffnessError when the step size underflows.
Trajectory simulate(const ThermalModel& model, const Eigen::VectorXd& T0, const FlowSchedule& flows,
                    const LoadSchedule& loads, double t_end, const SimulationOptions& options = {});

/// Initial temperatures: CPHX walls and fluids at their own values, tank and LLHX nodes at `loop`.
Eigen::VectorXd initial_temperatures(const ThermalModel& model, double wall, double fluid, double loop);

}  // namespace thermoforge::thermal

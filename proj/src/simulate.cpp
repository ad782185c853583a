#include "thermoforge/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge::thermal {

FlowSchedule::FlowSchedule(std::vector<double> times, std::vector<Eigen::VectorXd> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size())
    throw ValidationError("flow schedule needs matching, non-empty time and value lists");
  if (!std::is_sorted(times_.begin(), times_.end())) throw ValidationError("flow schedule times must be sorted");
}

FlowSchedule FlowSchedule::constant(const Eigen::VectorXd& independent) { return FlowSchedule({0.0}, {independent}); }

Eigen::VectorXd FlowSchedule::value(double t) const {
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto i = static_cast<std::size_t>(it - times_.begin());
  const double t0 = times_[i - 1], t1 = times_[i];
  const double w = t1 > t0 ? (t - t0) / (t1 - t0) : 1.0;
  return (1.0 - w) * values_[i - 1] + w * values_[i];
}

LoadSchedule::LoadSchedule(std::vector<double> times, std::vector<Eigen::VectorXd> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size())
    throw ValidationError("load schedule needs matching, non-empty time and value lists");
  if (!std::is_sorted(times_.begin(), times_.end())) throw ValidationError("load schedule times must be sorted");
}

LoadSchedule LoadSchedule::constant(const Eigen::VectorXd& loads) { return LoadSchedule({0.0}, {loads}); }

const Eigen::VectorXd& LoadSchedule::value(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

Eigen::VectorXd initial_temperatures(const ThermalModel& model, double wall, double fluid, double loop) {
  Eigen::VectorXd T(model.state_count);
  for (int i = 0; i < model.state_count; ++i) {
    switch (model.node_kinds[i]) {
      case NodeKind::kCphxWall: T[i] = wall; break;
      case NodeKind::kCphxFluid: T[i] = fluid; break;
      default: T[i] = loop; break;
    }
  }
  return T;
}

namespace {

// Dormand-Prince 5(4) tableau and Hairer's dense-output coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

struct DenseStep {
  Eigen::VectorXd r1, r2, r3, r4, r5;
  double t0 = 0.0, h = 0.0;

  [[nodiscard]] Eigen::VectorXd at(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    return r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
  }
};

}  // namespace

Trajectory simulate(const ThermalModel& model, const Eigen::VectorXd& T0, const FlowSchedule& flows,
                    const LoadSchedule& loads, double t_end, const SimulationOptions& opt) {
  if (!(t_end > 0.0)) throw ValidationError("simulation end time must be positive");
  if (T0.size() != model.state_count) throw ValidationError("initial state has the wrong dimension");
  if (!T0.allFinite()) throw ValidationError("non-finite initial state");
  const int n = model.state_count;
  const bool bounded = std::isfinite(opt.temperature_bound);

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(T0);
  if (bounded && T0.maxCoeff() >= opt.temperature_bound) {
    traj.event_time = 0.0;
    T0.maxCoeff(&traj.event_node);
    return traj;
  }

  std::vector<double> stops;
  for (double k : flows.knots())
    if (k > 0.0 && k < t_end) stops.push_back(k);
  for (double k : loads.knots())
    if (k > 0.0 && k < t_end) stops.push_back(k);
  stops.push_back(t_end);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  std::vector<DenseStep> dense;  // kept only when resampling
  double t = 0.0;
  double h = std::min(opt.initial_step, t_end);
  Eigen::VectorXd y = T0, k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  bool fresh = true;  // k1 must be recomputed after a knot

  for (double stop : stops) {
    while (t < stop) {
      if (traj.accepted_steps + traj.rejected_steps > opt.max_steps)
        throw StiffnessError("simulation exceeded " + std::to_string(opt.max_steps) + " steps");
      const bool last = t + h >= stop - 1e-12 * std::max(1.0, stop);
      if (last) h = stop - t;
      // Evaluate piecewise data strictly inside the step so knots are respected.
      const double tm = t + 0.5 * h;
      const Eigen::VectorXd& load_mid = loads.value(tm);
      auto g = [&](double tt, const Eigen::VectorXd& yy, Eigen::VectorXd& out) {
        const Eigen::VectorXd edge = model.edge_flows(model.flow_vector(flows.value(std::clamp(tt, t, t + h))));
        model.derivative(yy, edge, load_mid, out);
      };
      if (fresh) {
        g(t, y, k1);
        fresh = false;
      }
      ytmp = y + h * a21 * k1;
      g(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      g(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      g(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      g(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      g(t + h, ytmp, k6);
      ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      g(t + h, ynew, k7);
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double norm = 0.0;
      for (int i = 0; i < n; ++i) {
        const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        norm += (err[i] / sc) * (err[i] / sc);
      }
      norm = std::sqrt(norm / n);

      if (norm <= 1.0 || h <= opt.min_step) {
        if (h <= opt.min_step && norm > 1.0)
          throw StiffnessError("step size underflow at t=" + std::to_string(t) +
                               "; loosen the tolerance or check the model for stiffness");
        DenseStep ds;
        ds.t0 = t;
        ds.h = h;
        ds.r1 = y;
        ds.r2 = ynew - y;
        ds.r3 = h * k1 - ds.r2;
        ds.r4 = ds.r2 - h * k7 - ds.r3;
        ds.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        ++traj.accepted_steps;

        if (bounded && ynew.maxCoeff() >= opt.temperature_bound) {
          // Bisect on the dense output for the first crossing of any node.
          double lo = 0.0, hi = 1.0;
          for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (ds.at(t + mid * h).maxCoeff() >= opt.temperature_bound) hi = mid;
            else lo = mid;
          }
          const double te = t + hi * h;
          Eigen::VectorXd ye = ds.at(te);
          ye.maxCoeff(&traj.event_node);
          if (!opt.output_times.empty()) dense.push_back(std::move(ds));
          traj.times.push_back(te);
          traj.states.push_back(ye);
          traj.event_time = te;
          t = te;
          y = ye;
          goto finished;
        }

        if (!opt.output_times.empty()) dense.push_back(std::move(ds));
        t = last ? stop : t + h;
        y = ynew;
        k1 = k7;
        traj.times.push_back(t);
        traj.states.push_back(y);
        const double fac = norm > 0.0 ? std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0) : 5.0;
        h *= fac;
      } else {
        ++traj.rejected_steps;
        h *= std::clamp(0.9 * std::pow(norm, -0.2), 0.1, 0.9);
      }
    }
    fresh = true;  // piecewise inputs may jump at the knot
  }

finished:
  if (!opt.output_times.empty()) {
    Trajectory sampled;
    sampled.event_time = traj.event_time;
    sampled.event_node = traj.event_node;
    sampled.accepted_steps = traj.accepted_steps;
    sampled.rejected_steps = traj.rejected_steps;
    const double t_final = traj.times.back();
    const double eps = 1e-12 * std::max(1.0, t_final);
    std::size_t seg = 0;
    for (double ts : opt.output_times) {
      if (ts > t_final + eps) break;
      sampled.times.push_back(ts);
      if (ts <= 0.0 || dense.empty()) {
        sampled.states.push_back(T0);
        continue;
      }
      while (seg + 1 < dense.size() && dense[seg].t0 + dense[seg].h < ts) ++seg;
      sampled.states.push_back(ts >= t_final ? traj.states.back() : dense[seg].at(ts));
    }
    if (sampled.times.empty() || sampled.times.back() < t_final - eps) {
      sampled.times.push_back(t_final);
      sampled.states.push_back(traj.states.back());
    }
    return sampled;
  }
  return traj;
}

}  // namespace thermoforge::thermal

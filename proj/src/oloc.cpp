#include "thermoforge/oloc.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>

#include "thermoforge/errors.hpp"

namespace thermoforge::oloc {

using Eigen::VectorXd;

std::string to_string(Scheme s) { return s == Scheme::kTrapezoidal ? "trapezoidal" : "hermite_simpson"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "trapezoidal") return Scheme::kTrapezoidal;
  if (s == "hermite_simpson") return Scheme::kHermiteSimpson;
  throw ValidationError("unknown transcription scheme '" + s + "' (expected trapezoidal or hermite_simpson)");
}

void OlocOptions::validate() const {
  if (segments < 2) throw ValidationError("segments must be at least 2");
  if (!(tol > 0) || !(constraint_tol > 0)) throw ValidationError("tolerances must be positive");
  if (max_iterations < 1) throw ValidationError("max_iterations must be positive");
  if (!(tf_min > 0) || !(tf_max > tf_min)) throw ValidationError("need 0 < tf_min < tf_max");
  if (!(flow_rate_limit > 0)) throw ValidationError("flow_rate_limit must be positive");
  if (!(penalty_scale >= 0)) throw ValidationError("penalty_scale must be non-negative");
  if (refinement_rounds < 1) throw ValidationError("refinement_rounds must be at least 1");
  if (!(refinement_tol > 0)) throw ValidationError("refinement_tol must be positive");
  for (double t : {temperature_max, wall_init, fluid_init, loop_init})
    if (!std::isfinite(t)) throw ValidationError("temperatures must be finite");
}

OlocOptions options_from_json(const nlohmann::json& j, const OlocOptions& base) {
  if (!j.is_object()) throw ValidationError("oloc options must be a JSON object");
  OlocOptions o = base;
  for (const auto& [key, value] : j.items()) {
    if (key == "segments") o.segments = value.get<int>();
    else if (key == "scheme") o.scheme = scheme_from_string(value.get<std::string>());
    else if (key == "tol") o.tol = value.get<double>();
    else if (key == "constraint_tol") o.constraint_tol = value.get<double>();
    else if (key == "max_iterations") o.max_iterations = value.get<int>();
    else if (key == "tf_min") o.tf_min = value.get<double>();
    else if (key == "tf_max") o.tf_max = value.get<double>();
    else if (key == "temperature_max") o.temperature_max = value.get<double>();
    else if (key == "wall_init") o.wall_init = value.get<double>();
    else if (key == "fluid_init") o.fluid_init = value.get<double>();
    else if (key == "loop_init") o.loop_init = value.get<double>();
    else if (key == "flow_rate_limit") o.flow_rate_limit = value.get<double>();
    else if (key == "penalty_scale") o.penalty_scale = value.get<double>();
    else if (key == "free_initial_flow") o.free_initial_flow = value.get<bool>();
    else if (key == "refinement_rounds") o.refinement_rounds = value.get<int>();
    else if (key == "refinement_tol") o.refinement_tol = value.get<double>();
    else if (key == "verbose") o.verbose = value.get<bool>();
    else throw ValidationError("unknown oloc option '" + key + "'");
  }
  o.validate();
  return o;
}

nlohmann::json to_json(const OlocOptions& o) {
  return {{"segments", o.segments},
          {"scheme", to_string(o.scheme)},
          {"tol", o.tol},
          {"constraint_tol", o.constraint_tol},
          {"max_iterations", o.max_iterations},
          {"tf_min", o.tf_min},
          {"tf_max", o.tf_max},
          {"temperature_max", o.temperature_max},
          {"wall_init", o.wall_init},
          {"fluid_init", o.fluid_init},
          {"loop_init", o.loop_init},
          {"flow_rate_limit", o.flow_rate_limit},
          {"penalty_scale", o.penalty_scale},
          {"free_initial_flow", o.free_initial_flow},
          {"refinement_rounds", o.refinement_rounds},
          {"refinement_tol", o.refinement_tol}};
}

OlocProblem formulate(const thermal::ThermalModel& model, const config::FlowMap& flow_map,
                      const thermal::LoadSchedule& loads, const OlocOptions& options) {
  options.validate();
  if (model.independent_count != flow_map.num_independent())
    throw ValidationError("thermal model and flow map describe different configurations");
  if (loads.value(0.0).size() != model.device_count())
    throw ValidationError("load schedule has " + std::to_string(loads.value(0.0).size()) + " entries for " +
                          std::to_string(model.device_count()) + " devices");
  if (!(options.temperature_max > model.sink_temperature))
    throw ValidationError("temperature bound must exceed the sink temperature");
  OlocProblem p;
  p.model = model;
  p.flow_map = flow_map;
  p.loads = loads;
  p.options = options;
  p.initial_temperature =
      thermal::initial_temperatures(model, options.wall_init, options.fluid_init, options.loop_init);
  const int nf = flow_map.num_independent();
  p.penalty_weight = nf > 0 ? options.penalty_scale / (nf * options.flow_rate_limit * options.flow_rate_limit) : 0.0;
  return p;
}

std::optional<double> equal_split_endurance(const OlocProblem& problem) {
  thermal::SimulationOptions so;
  so.temperature_bound = problem.options.temperature_max;
  const auto traj = thermal::simulate(problem.model, problem.initial_temperature,
                                      thermal::FlowSchedule::constant(problem.flow_map.equal_split()), problem.loads,
                                      problem.options.tf_max, so);
  return traj.event_time;
}

VectorXd initial_guess(const Transcription& tr) {
  const auto& problem = tr.problem();
  const double tf = tr.time_ref();
  thermal::SimulationOptions so;
  so.temperature_bound = std::numeric_limits<double>::quiet_NaN();
  for (double s : tr.grid()) so.output_times.push_back(s * tf);
  so.output_times.back() = tf;
  const VectorXd split = problem.flow_map.equal_split();
  const auto traj = thermal::simulate(problem.model, problem.initial_temperature,
                                      thermal::FlowSchedule::constant(split), problem.loads, tf, so);
  const auto np = static_cast<std::size_t>(tr.point_count());
  std::vector<VectorXd> temps(traj.states.begin(), traj.states.begin() + static_cast<std::ptrdiff_t>(np));
  std::vector<VectorXd> flows(np, split);
  std::vector<VectorXd> controls(np, VectorXd::Zero(problem.control_count()));
  return tr.pack(tf, temps, flows, controls);
}

namespace {

nlp::IpmOptions ipm_options(const OlocOptions& o) {
  nlp::IpmOptions ipm;
  ipm.tol = o.tol;
  ipm.constraint_tol = o.constraint_tol;
  ipm.max_iterations = o.max_iterations;
  ipm.verbose = o.verbose;
  return ipm;
}

std::string initial_state_violation(const OlocProblem& problem) {
  const auto& T0 = problem.initial_temperature;
  for (int i = 0; i < T0.size(); ++i)
    if (T0[i] >= problem.options.temperature_max)
      return "initial temperature of node " + problem.model.node_names[static_cast<std::size_t>(i)] + " (" +
             std::to_string(T0[i]) + " C) violates the bound T_max = " +
             std::to_string(problem.options.temperature_max) + " C";
  return {};
}

double spread_at_end(const OlocProblem& problem, const VectorXd& T_end, double t_end) {
  const VectorXd& loads = problem.loads.value(t_end);
  double spread = 0.0;
  for (int d = 0; d < problem.model.device_count(); ++d)
    if (loads[d] > 0.0)
      spread = std::max(spread, std::abs(T_end[problem.model.wall_nodes[static_cast<std::size_t>(d)]] -
                                         problem.options.temperature_max));
  return spread;
}

// Fills trajectories and derived figures from a decision vector.
void unpack(const Transcription& tr, const VectorXd& x, OlocSolution& s) {
  const auto& fm = tr.problem().flow_map;
  s.decision = x;
  s.segments = tr.segments();
  s.scheme = tr.scheme();
  s.t_end = tr.final_time(x);
  s.penalty = tr.penalty(x);
  s.objective = s.t_end - s.penalty;
  s.penalty_weight = tr.problem().penalty_weight;
  s.times.clear();
  s.temperatures.clear();
  s.independent_flows.clear();
  s.dependent_flows.clear();
  s.controls.clear();
  for (int p = 0; p < tr.point_count(); ++p) {
    s.times.push_back(tr.grid()[static_cast<std::size_t>(p)] * s.t_end);
    s.temperatures.push_back(tr.temperatures(x, p));
    const VectorXd m = tr.flows(x, p);
    s.independent_flows.push_back(m);
    s.dependent_flows.push_back(fm.num_dependent() > 0 ? fm.dependent_flows(m) : VectorXd());
    s.controls.push_back(tr.controls(x, p));
  }
  s.wall_arrival_spread = spread_at_end(tr.problem(), s.temperatures.back(), s.t_end);
}

// Worst violation of the NLP's bounds and constraints at x, in scaled units.
double violation(const Transcription& tr, const VectorXd& x) {
  VectorXd xl(tr.num_variables()), xu(tr.num_variables()), gl(tr.num_constraints()), gu(tr.num_constraints());
  tr.bounds(xl, xu, gl, gu);
  VectorXd g;
  tr.constraints(x, g);
  double v = 0.0;
  for (int i = 0; i < x.size(); ++i) v = std::max({v, xl[i] - x[i], x[i] - xu[i]});
  for (int i = 0; i < g.size(); ++i) v = std::max({v, gl[i] - g[i], g[i] - gu[i]});
  return v;
}

OlocSolution run_solver(const Transcription& tr, const VectorXd& x0, int& iterations, bool& converged) {
  const auto& opt = tr.problem().options;
  const auto r = nlp::minimize(tr, x0, ipm_options(opt));
  iterations += r.iterations;
  converged = r.converged();
  OlocSolution s;
  unpack(tr, r.x, s);
  s.max_violation = violation(tr, r.x);
  if (r.status == nlp::IpmStatus::kSolved) s.status = "optimal";
  else if (r.status == nlp::IpmStatus::kAcceptable) s.status = "optimal (acceptable tolerance)";
  else s.status = nlp::to_string(r.status);
  s.message = r.message;
  return s;
}

}  // namespace

OlocSolution solve(const Transcription& tr) {
  const std::string bad = initial_state_violation(tr.problem());
  if (!bad.empty()) {
    OlocSolution s;
    s.status = "infeasible initial state";
    s.message = bad;
    s.segments = tr.segments();
    s.scheme = tr.scheme();
    return s;
  }
  return solve(tr, initial_guess(tr));
}

OlocSolution solve(const Transcription& tr, const VectorXd& x0) {
  const auto start = std::chrono::steady_clock::now();
  const auto& opt = tr.problem().options;
  OlocSolution s;
  const std::string bad = initial_state_violation(tr.problem());
  if (!bad.empty()) {
    s.status = "infeasible initial state";
    s.message = bad;
    s.segments = tr.segments();
    s.scheme = tr.scheme();
    return s;
  }
  int iterations = 0;
  bool converged = false;
  s = run_solver(tr, x0, iterations, converged);
  int solves = 1;
  if (converged && s.penalty >= 0.01 * s.t_end && tr.problem().penalty_weight > 0.0) {
    OlocProblem relaxed = tr.problem();
    relaxed.penalty_weight /= 10.0;
    const Transcription tr2(relaxed, tr.segments(), tr.scheme(), tr.time_ref());
    s = run_solver(tr2, s.decision, iterations, converged);
    ++solves;
    if (converged && s.penalty >= 0.01 * s.t_end) s.status = "penalty rule violated";
  }
  s.iterations = iterations;
  s.solves = solves;
  s.refinement_history = {s.t_end};
  s.accepted = converged && s.status.rfind("optimal", 0) == 0 && s.max_violation <= opt.constraint_tol;
  if (s.accepted && s.t_end >= opt.tf_max * (1.0 - 1e-6)) s.status = "endurance unbounded at cap";
  s.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

namespace {

// Decision vector on a grid with twice the point density.
VectorXd refine_guess(const Transcription& coarse, const VectorXd& x, const Transcription& fine) {
  VectorXd y(fine.num_variables());
  y[0] = x[0] * coarse.time_ref() / fine.time_ref();
  const int ps = coarse.point_size();
  for (int p = 0; p < fine.point_count(); ++p) {
    if (p % 2 == 0) {
      y.segment(1 + p * ps, ps) = x.segment(1 + (p / 2) * ps, ps);
    } else {
      y.segment(1 + p * ps, ps) = 0.5 * (x.segment(1 + (p / 2) * ps, ps) + x.segment(1 + (p / 2 + 1) * ps, ps));
    }
  }
  return y;
}

OlocSolution cap_solution(const OlocProblem& problem) {
  OlocSolution s;
  const auto& opt = problem.options;
  s.status = "endurance unbounded at cap";
  s.accepted = true;
  s.t_end = opt.tf_max;
  s.objective = opt.tf_max;
  s.segments = opt.segments;
  s.scheme = opt.scheme;
  s.penalty_weight = problem.penalty_weight;
  s.refinement_history = {opt.tf_max};
  s.message = "no node reaches the temperature bound under the equal split before the horizon cap";
  const Transcription tr(problem, opt.segments, opt.scheme, opt.tf_max);
  unpack(tr, initial_guess(tr), s);
  s.penalty = 0.0;
  s.objective = s.t_end;
  return s;
}

}  // namespace

OlocSolution evaluate_endurance(const thermal::ThermalModel& model, const config::FlowMap& flow_map,
                                const thermal::LoadSchedule& loads, const OlocOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  OlocProblem problem = formulate(model, flow_map, loads, options);
  const std::string bad = initial_state_violation(problem);
  if (!bad.empty()) {
    OlocSolution s;
    s.status = "infeasible initial state";
    s.message = bad;
    return s;
  }
  const auto t_eq = equal_split_endurance(problem);
  if (!t_eq) {
    OlocSolution s = cap_solution(problem);
    s.resimulation_error = resimulation_error(problem, s);
    return s;
  }
  const double t_ref = std::max(*t_eq, options.tf_min);

  auto tr = std::make_unique<Transcription>(problem, options.segments, options.scheme, t_ref);
  OlocSolution best = solve(*tr, initial_guess(*tr));
  std::vector<double> history = {best.t_end};
  int iterations = best.iterations;
  int solves = best.solves;
  for (int round = 1; round < options.refinement_rounds && best.accepted; ++round) {
    if (best.penalty_weight != problem.penalty_weight) problem.penalty_weight = best.penalty_weight;
    auto finer = std::make_unique<Transcription>(problem, tr->segments() * 2, options.scheme, t_ref);
    OlocSolution next = solve(*finer, refine_guess(*tr, best.decision, *finer));
    iterations += next.iterations;
    solves += next.solves;
    if (!next.accepted) break;
    history.push_back(next.t_end);
    const double change = std::abs(next.t_end - best.t_end) / next.t_end;
    best = std::move(next);
    tr = std::move(finer);
    if (change < options.refinement_tol) break;
  }
  best.iterations = iterations;
  best.solves = solves;
  best.refinement_history = history;
  if (best.accepted || !best.temperatures.empty()) {
    try {
      best.resimulation_error = resimulation_error(problem, best);
    } catch (const Error&) {
      best.resimulation_error = std::numeric_limits<double>::infinity();
    }
  }
  best.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return best;
}

double resimulation_error(const OlocProblem& problem, const OlocSolution& solution) {
  if (solution.times.empty()) throw ValidationError("solution has no trajectory to re-simulate");
  const thermal::FlowSchedule flows = problem.control_count() > 0
                                          ? thermal::FlowSchedule(solution.times, solution.independent_flows)
                                          : thermal::FlowSchedule::constant(VectorXd());
  thermal::SimulationOptions so;
  so.temperature_bound = std::numeric_limits<double>::quiet_NaN();
  const auto traj =
      thermal::simulate(problem.model, problem.initial_temperature, flows, problem.loads, solution.t_end, so);
  return (traj.final_state() - solution.temperatures.back()).lpNorm<Eigen::Infinity>();
}

nlohmann::json summary_json(const OlocSolution& s, const std::string& config) {
  nlohmann::json j = {{"config", config},
                      {"t_end", s.t_end},
                      {"objective", s.objective},
                      {"penalty", s.penalty},
                      {"status", s.status},
                      {"accepted", s.accepted},
                      {"wall_arrival_spread", s.wall_arrival_spread},
                      {"segments", s.segments},
                      {"scheme", to_string(s.scheme)},
                      {"iterations", s.iterations},
                      {"solves", s.solves},
                      {"max_violation", s.max_violation},
                      {"resimulation_error", s.resimulation_error},
                      {"refinement_history", s.refinement_history}};
  if (!s.message.empty()) j["message"] = s.message;
  return j;
}

namespace {

std::string edge_name(const config::FlowMap& fm, int edge) {
  const auto& e = fm.edges[static_cast<std::size_t>(edge)];
  return std::to_string(e.parent) + "_" + std::to_string(e.child);
}

}  // namespace

void write_trajectory_csv(const OlocSolution& s, const thermal::ThermalModel& model, const config::FlowMap& flow_map,
                          std::ostream& out) {
  out << "t_s";
  for (const auto& name : model.node_names) out << ",T_" << name;
  const auto ni = s.independent_flows.empty() ? 0 : s.independent_flows.front().size();
  const auto nd = s.dependent_flows.empty() ? 0 : s.dependent_flows.front().size();
  for (int e : flow_map.independent_edges) out << ",m_" << edge_name(flow_map, e);
  for (int e : flow_map.dependent_edges) out << ",m_" << edge_name(flow_map, e);
  for (int e : flow_map.independent_edges) out << ",u_" << edge_name(flow_map, e);
  out << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.6f", v == 0.0 ? 0.0 : v);
    out << buf;
  };
  for (std::size_t p = 0; p < s.times.size(); ++p) {
    std::snprintf(buf, sizeof buf, "%.6f", s.times[p]);
    out << buf;
    for (Eigen::Index i = 0; i < s.temperatures[p].size(); ++i) put(s.temperatures[p][i]);
    for (Eigen::Index k = 0; k < ni; ++k) put(s.independent_flows[p][k]);
    for (Eigen::Index k = 0; k < nd; ++k) put(s.dependent_flows[p][k]);
    for (Eigen::Index k = 0; k < ni; ++k) put(s.controls[p][k]);
    out << '\n';
  }
}

}  // namespace thermoforge::oloc

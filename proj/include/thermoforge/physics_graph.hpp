#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermoforge/config_graph.hpp"
#include "thermoforge/flow_map.hpp"

namespace thermoforge::thermal {

using config::Label;

/// Physical constants of the loop. Masses in kg, specific heats in J/(kg K),
/// conductances in W/K, temperatures in deg C, flow rates in kg/s.
struct PhysicsParams {
  double cp_fluid = 4184.0;
  double cp_wall = 896.0;
  double mass_llhx_wall = 1.2;
  double mass_cphx_wall = 1.15;
  double mass_tank_fluid = 2.01;
  double mass_cphx_fluid = 0.2;
  double mass_llhx_primary = 0.3;
  double mass_llhx_secondary = 0.3;
  double ha_cphx = 500.0;
  double ha_llhx_primary = 1000.0;
  double ha_llhx_secondary = 1000.0;
  double sink_temperature = 15.0;
  double sink_flow = 0.2;
  double pump_flow = 0.4;

  /// Throws ValidationError naming the first non-positive or non-finite field.
  void validate() const;
};

/// Starts from `base` and overrides any key present in `j`; unknown keys are rejected.
PhysicsParams params_from_json(const nlohmann::json& j, const PhysicsParams& base = {});
nlohmann::json to_json(const PhysicsParams& p);

enum class NodeKind { kTankFluid, kCphxFluid, kCphxWall, kLlhxPrimary, kLlhxWall, kLlhxSecondary, kSinkBoundary };
enum class EdgeKind { kAdvection, kConvection, kBidirAdvection };

/// What carries the mass flow of an advective edge.
enum class FlowSource { kNone, kBranchEdge, kPump, kSink };

std::string to_string(NodeKind k);
std::string to_string(EdgeKind k);

struct PhysicsNode {
  int id = 0;
  NodeKind kind = NodeKind::kTankFluid;
  double capacitance = 0.0;  ///< J/K; zero for the sink boundary
  Label device = config::kTank;
  std::string name;
};

struct PhysicsEdge {
  int tail = 0;
  int head = 0;
  EdgeKind kind = EdgeKind::kAdvection;
  double conductance = 0.0;  ///< hA in W/K for convection edges
  FlowSource flow_source = FlowSource::kNone;
  int flow_index = -1;       ///< branch-edge index into the FlowMap for kBranchEdge
};

/// Heat loads in W keyed by device label.
using HeatLoads = std::map<Label, double>;

/// Loads given as a list in label order 1..N (kW) converted to W.
HeatLoads loads_from_kw(const std::vector<double>& kw);

/// The configuration expanded into temperature nodes and power-flow edges.
///
/// Node ids: 0 = tank, then for each device (ascending label) its fluid and
/// wall node, then LLHX primary, wall, secondary; the sink boundary is last and
/// is not a state.
struct PhysicsGraph {
  config::ConfigGraph graph;
  config::FlowMap flow_map;
  PhysicsParams params;
  std::vector<PhysicsNode> nodes;
  std::vector<PhysicsEdge> edges;
  std::vector<Label> device_labels;  ///< ascending
  HeatLoads loads;                   ///< nominal loads, W
  std::map<Label, int> fluid_node;
  std::map<Label, int> wall_node;    ///< heat-load injection point per device
  int tank = 0;
  int llhx_primary = 0;
  int llhx_wall = 0;
  int llhx_secondary = 0;
  int sink = 0;

  /// Temperature states (all nodes except the sink boundary).
  [[nodiscard]] int state_count() const noexcept { return static_cast<int>(nodes.size()) - 1; }
  [[nodiscard]] int device_count() const noexcept { return static_cast<int>(device_labels.size()); }
  [[nodiscard]] int count_edges(EdgeKind kind) const;

  /// Nominal loads as a vector in device order.
  [[nodiscard]] Eigen::VectorXd load_vector() const;
};

/// Throws ValidationError naming the label when a load is missing.
PhysicsGraph build_physics_graph(const config::ConfigGraph& graph, const HeatLoads& loads_w,
                                 const PhysicsParams& params = {});

}  // namespace thermoforge::thermal

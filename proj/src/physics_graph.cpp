#include "thermoforge/physics_graph.hpp"

#include <cmath>
#include <functional>
#include <utility>

#include "thermoforge/errors.hpp"

namespace thermoforge::thermal {

namespace {

// Single source of truth for the JSON keys of PhysicsParams.
const std::vector<std::pair<const char*, double PhysicsParams::*>>& param_fields() {
  static const std::vector<std::pair<const char*, double PhysicsParams::*>> fields = {
      {"cp_fluid", &PhysicsParams::cp_fluid},
      {"cp_wall", &PhysicsParams::cp_wall},
      {"mass_llhx_wall", &PhysicsParams::mass_llhx_wall},
      {"mass_cphx_wall", &PhysicsParams::mass_cphx_wall},
      {"mass_tank_fluid", &PhysicsParams::mass_tank_fluid},
      {"mass_cphx_fluid", &PhysicsParams::mass_cphx_fluid},
      {"mass_llhx_primary", &PhysicsParams::mass_llhx_primary},
      {"mass_llhx_secondary", &PhysicsParams::mass_llhx_secondary},
      {"ha_cphx", &PhysicsParams::ha_cphx},
      {"ha_llhx_primary", &PhysicsParams::ha_llhx_primary},
      {"ha_llhx_secondary", &PhysicsParams::ha_llhx_secondary},
      {"sink_temperature", &PhysicsParams::sink_temperature},
      {"sink_flow", &PhysicsParams::sink_flow},
      {"pump_flow", &PhysicsParams::pump_flow},
  };
  return fields;
}

}  // namespace

void PhysicsParams::validate() const {
  for (const auto& [name, member] : param_fields()) {
    const double v = this->*member;
    if (!std::isfinite(v)) throw ValidationError(std::string("physics parameter ") + name + " is not finite");
    if (member != &PhysicsParams::sink_temperature && !(v > 0.0))
      throw ValidationError(std::string("physics parameter ") + name + " must be positive");
  }
}

PhysicsParams params_from_json(const nlohmann::json& j, const PhysicsParams& base) {
  PhysicsParams p = base;
  if (!j.is_object()) throw ValidationError("physics parameters must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const auto& [name, member] : param_fields()) {
      if (key == name) {
        p.*member = value.get<double>();
        found = true;
        break;
      }
    }
    if (!found) throw ValidationError("unknown physics parameter '" + key + "'");
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const PhysicsParams& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, member] : param_fields()) j[name] = p.*member;
  return j;
}

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::kTankFluid: return "tank_fluid";
    case NodeKind::kCphxFluid: return "cphx_fluid";
    case NodeKind::kCphxWall: return "cphx_wall";
    case NodeKind::kLlhxPrimary: return "llhx_primary";
    case NodeKind::kLlhxWall: return "llhx_wall";
    case NodeKind::kLlhxSecondary: return "llhx_secondary";
    case NodeKind::kSinkBoundary: return "sink_boundary";
  }
  return "?";
}

std::string to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::kAdvection: return "advection";
    case EdgeKind::kConvection: return "convection";
    case EdgeKind::kBidirAdvection: return "bidir_advection";
  }
  return "?";
}

HeatLoads loads_from_kw(const std::vector<double>& kw) {
  HeatLoads loads;
  for (std::size_t i = 0; i < kw.size(); ++i) loads[static_cast<Label>(i + 1)] = kw[i] * 1000.0;
  return loads;
}

int PhysicsGraph::count_edges(EdgeKind kind) const {
  int c = 0;
  for (const auto& e : edges) c += e.kind == kind ? 1 : 0;
  return c;
}

Eigen::VectorXd PhysicsGraph::load_vector() const {
  Eigen::VectorXd v(device_count());
  for (int i = 0; i < device_count(); ++i) v[i] = loads.at(device_labels[i]);
  return v;
}

PhysicsGraph build_physics_graph(const config::ConfigGraph& graph, const HeatLoads& loads_w,
                                 const PhysicsParams& params) {
  params.validate();
  if (graph.node_count() == 0) throw ValidationError("configuration has no devices");
  PhysicsGraph pg;
  pg.graph = graph;
  pg.params = params;
  pg.flow_map = config::build_flow_map(graph, params.pump_flow);
  pg.device_labels.assign(graph.labels().begin(), graph.labels().end());
  for (Label l : pg.device_labels) {
    auto it = loads_w.find(l);
    if (it == loads_w.end()) throw ValidationError("missing heat load for device " + std::to_string(l));
    if (!std::isfinite(it->second)) throw ValidationError("non-finite heat load for device " + std::to_string(l));
    pg.loads[l] = it->second;
  }

  auto add_node = [&](NodeKind kind, double cap, Label device, std::string name) {
    const int id = static_cast<int>(pg.nodes.size());
    pg.nodes.push_back({id, kind, cap, device, std::move(name)});
    return id;
  };
  const double cpf = params.cp_fluid;
  pg.tank = add_node(NodeKind::kTankFluid, params.mass_tank_fluid * cpf, config::kTank, "tank");
  for (Label l : pg.device_labels) {
    pg.fluid_node[l] = add_node(NodeKind::kCphxFluid, params.mass_cphx_fluid * cpf, l, "f" + std::to_string(l));
    pg.wall_node[l] = add_node(NodeKind::kCphxWall, params.mass_cphx_wall * params.cp_wall, l, "w" + std::to_string(l));
  }
  pg.llhx_primary = add_node(NodeKind::kLlhxPrimary, params.mass_llhx_primary * cpf, config::kTank, "llhx_p");
  pg.llhx_wall = add_node(NodeKind::kLlhxWall, params.mass_llhx_wall * params.cp_wall, config::kTank, "llhx_w");
  pg.llhx_secondary = add_node(NodeKind::kLlhxSecondary, params.mass_llhx_secondary * cpf, config::kTank, "llhx_s");
  pg.sink = add_node(NodeKind::kSinkBoundary, 0.0, config::kTank, "sink");

  auto fluid_of = [&](Label l) { return l == config::kTank ? pg.tank : pg.fluid_node.at(l); };

  // Branch advection: upstream fluid -> downstream fluid, one per tree edge.
  for (int i = 0; i < pg.flow_map.num_edges(); ++i) {
    const auto& be = pg.flow_map.edges[i];
    pg.edges.push_back({fluid_of(be.parent), fluid_of(be.child), EdgeKind::kAdvection, 0.0, FlowSource::kBranchEdge, i});
  }
  // Branch tails return to the LLHX primary side carrying the leaf's inflow.
  for (Label v : graph.preorder()) {
    if (v == config::kTank || !graph.is_leaf(v)) continue;
    pg.edges.push_back({fluid_of(v), pg.llhx_primary, EdgeKind::kAdvection, 0.0, FlowSource::kBranchEdge,
                        pg.flow_map.edge_into(v)});
  }
  pg.edges.push_back({pg.llhx_primary, pg.tank, EdgeKind::kAdvection, 0.0, FlowSource::kPump, -1});

  for (Label l : pg.device_labels)
    pg.edges.push_back({pg.wall_node[l], pg.fluid_node[l], EdgeKind::kConvection, params.ha_cphx, FlowSource::kNone, -1});
  pg.edges.push_back({pg.llhx_wall, pg.llhx_primary, EdgeKind::kConvection, params.ha_llhx_primary, FlowSource::kNone, -1});
  pg.edges.push_back({pg.llhx_wall, pg.llhx_secondary, EdgeKind::kConvection, params.ha_llhx_secondary, FlowSource::kNone, -1});

  pg.edges.push_back({pg.sink, pg.llhx_secondary, EdgeKind::kBidirAdvection, 0.0, FlowSource::kSink, -1});
  return pg;
}

}  // namespace thermoforge::thermal

// Command-line front end: count, enumerate, cluster, solve, run.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "thermoforge/enumeration.hpp"
#include "thermoforge/errors.hpp"
#include "thermoforge/notation.hpp"
#include "thermoforge/oloc.hpp"
#include "thermoforge/physics_graph.hpp"
#include "thermoforge/spatial.hpp"
#include "thermoforge/study.hpp"
#include "thermoforge/thermal_model.hpp"

using namespace thermoforge;
namespace fs = std::filesystem;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what(), e.byte);
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

std::vector<double> parse_loads(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("cannot read load value '" + item + "'");
    }
  }
  if (out.empty()) throw ValidationError("no loads given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal loop configuration enumeration and endurance optimization"};
  app.require_subcommand(1);

  auto* count = app.add_subcommand("count", "Count single-split or multi-split configurations");
  int count_nodes = 0;
  int count_junctions = 1;
  count->add_option("--nodes,-n", count_nodes, "Number of devices")->required();
  count->add_option("--junctions,-j", count_junctions, "Number of junction groups")->check(CLI::PositiveNumber);

  auto* enumerate = app.add_subcommand("enumerate", "Write a configuration population as a JSON list");
  int enum_nodes = 0;
  int enum_junctions = 1;
  std::string enum_strategy = "single_split";
  std::string enum_layout, enum_out, enum_mode = "series_parallel";
  int enum_levels = 1, enum_level = 1;
  std::uint64_t enum_seed = 0;
  enumerate->add_option("--nodes,-n", enum_nodes, "Number of devices");
  enumerate
      ->add_option("--strategy,-s", enum_strategy,
                   "single_split | trees | all_trees | enumerated_junctions | spatial_junctions")
      ->capture_default_str();
  enumerate->add_option("--junctions,-j", enum_junctions, "Junctions for enumerated_junctions");
  enumerate->add_option("--layout", enum_layout, "Layout JSON for spatial_junctions");
  enumerate->add_option("--levels", enum_levels, "Clustering depth for spatial_junctions");
  enumerate->add_option("--level", enum_level, "Tree level to generate");
  enumerate->add_option("--subgraph-mode", enum_mode, "series_parallel | increasing_trees | all_trees");
  enumerate->add_option("--seed", enum_seed, "Clustering seed");
  enumerate->add_option("--out,-o", enum_out, "Output file (default stdout)");

  auto* cluster = app.add_subcommand("cluster", "Build the hierarchical super-node tree of a layout");
  std::string cluster_layout, cluster_out;
  int cluster_levels = 1;
  std::uint64_t cluster_seed = 0;
  cluster->add_option("--layout", cluster_layout, "Layout JSON")->required();
  cluster->add_option("--levels", cluster_levels, "Clustering depth");
  cluster->add_option("--seed", cluster_seed, "Base seed");
  cluster->add_option("--out,-o", cluster_out, "Output file (default stdout)");

  auto* solve = app.add_subcommand("solve", "Maximize thermal endurance of one configuration");
  std::string solve_config, solve_loads, solve_options, solve_physics, solve_csv;
  solve->add_option("--config,-c", solve_config, "Configuration notation, e.g. \"0 (1,2) (3)\"")->required();
  solve->add_option("--loads,-l", solve_loads, "Comma-separated loads in kW for devices 1..N")->required();
  solve->add_option("--options", solve_options, "OLOC options JSON");
  solve->add_option("--physics", solve_physics, "Physics parameter overrides JSON");
  solve->add_option("--trajectory", solve_csv, "Write the optimal trajectory CSV here");

  auto* run = app.add_subcommand("run", "Run a study: enumerate, evaluate in parallel, rank, report");
  std::string run_spec, run_out;
  int run_workers = 0;
  run->add_option("--spec", run_spec, "Study spec JSON")->required();
  run->add_option("--workers,-w", run_workers, "Worker threads (THERMOFORGE_WORKERS overrides)");
  run->add_option("--out,-o", run_out, "Output directory (overrides the spec)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*count) {
      const auto v = count_junctions == 1 ? enumeration::count_single_split(count_nodes)
                                          : enumeration::count_multi_split(count_nodes, count_junctions);
      std::cout << v << '\n';
    } else if (*enumerate) {
      enumeration::GraphPopulation pop;
      if (enum_strategy == "single_split") {
        pop = enumeration::enumerate_single_split(enum_nodes);
      } else if (enum_strategy == "trees") {
        pop = enumeration::enumerate_trees(enum_nodes, enumeration::TreeMode::kIncreasing);
      } else if (enum_strategy == "all_trees") {
        pop = enumeration::enumerate_trees(enum_nodes, enumeration::TreeMode::kAllLabeled);
      } else if (enum_strategy == "enumerated_junctions") {
        pop = enumeration::enumerate_junction_placements(enum_nodes, enum_junctions);
      } else if (enum_strategy == "spatial_junctions") {
        if (enum_layout.empty()) throw ValidationError("spatial_junctions needs --layout");
        nlohmann::json spec = {{"layout", read_json(enum_layout)},
                               {"strategy", "spatial_junctions"},
                               {"num_levels", enum_levels},
                               {"level", enum_level},
                               {"subgraph_mode", enum_mode},
                               {"seed", enum_seed}};
        const auto layout = spatial::layout_from_json(spec["layout"]);
        if (layout.heat_loads_kw.empty())
          spec["loads_kw"] = std::vector<double>(static_cast<std::size_t>(layout.device_count()), 0.0);
        pop = study::build_population(study::spec_from_json(spec));
      } else {
        throw ValidationError("unknown strategy '" + enum_strategy + "'");
      }
      pop.sort_by_key();
      nlohmann::json out = nlohmann::json::array();
      for (const auto& k : pop.keys()) out.push_back(k);
      write_text(enum_out, out.dump(2) + "\n");
      std::cerr << pop.size() << " configurations\n";
    } else if (*cluster) {
      spatial::ClusterOptions co;
      co.seed = cluster_seed;
      const auto tree = spatial::build_supernode_tree(spatial::layout_from_json(read_json(cluster_layout)),
                                                      cluster_levels, co);
      write_text(cluster_out, spatial::to_json(tree).dump(2) + "\n");
    } else if (*solve) {
      const auto graph = config::parse_notation(solve_config);
      const auto params = solve_physics.empty() ? thermal::PhysicsParams{}
                                                : thermal::params_from_json(read_json(solve_physics));
      const auto options = solve_options.empty() ? oloc::OlocOptions{}
                                                 : oloc::options_from_json(read_json(solve_options));
      const auto pg = thermal::build_physics_graph(graph, thermal::loads_from_kw(parse_loads(solve_loads)), params);
      const auto model = thermal::assemble(pg);
      const auto sol = oloc::evaluate_endurance(model, pg.flow_map,
                                                thermal::LoadSchedule::constant(pg.load_vector()), options);
      std::cout << oloc::summary_json(sol, config::serialize(graph)).dump(2) << '\n';
      if (!solve_csv.empty()) {
        std::ostringstream csv;
        oloc::write_trajectory_csv(sol, model, pg.flow_map, csv);
        write_text(solve_csv, csv.str());
      }
      return sol.accepted ? 0 : 3;
    } else if (*run) {
      auto spec = study::load_spec(run_spec);
      if (run_workers > 0) spec.workers = run_workers;
      if (!run_out.empty()) spec.output_dir = run_out;
      const auto result = study::run_study(spec);
      const auto& top = result.ranking.entries.front();
      std::printf("%zu configurations, %zu ranked, %zu failed\n", result.population.size(),
                  result.ranking.entries.size(), result.ranking.failures.size());
      std::printf("best: %s  t_end = %.4f s\n", top.notation.c_str(), top.t_end);
      if (!spec.output_dir.empty()) std::printf("artifacts in %s\n", spec.output_dir.string().c_str());
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

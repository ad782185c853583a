#include "thermoforge/study.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "thermoforge/errors.hpp"
#include "thermoforge/notation.hpp"
#include "thermoforge/thermal_model.hpp"

namespace thermoforge::study {

namespace fs = std::filesystem;

PopulationSource source_from_string(const std::string& s) {
  if (s == "single_split") return PopulationSource::kSingleSplit;
  if (s == "spatial_junctions") return PopulationSource::kSpatialJunctions;
  if (s == "enumerated_junctions") return PopulationSource::kEnumeratedJunctions;
  if (s == "explicit") return PopulationSource::kExplicit;
  throw ValidationError("unknown strategy '" + s +
                        "' (expected single_split, spatial_junctions, enumerated_junctions or explicit)");
}

std::string to_string(PopulationSource s) {
  switch (s) {
    case PopulationSource::kSingleSplit: return "single_split";
    case PopulationSource::kSpatialJunctions: return "spatial_junctions";
    case PopulationSource::kEnumeratedJunctions: return "enumerated_junctions";
    case PopulationSource::kExplicit: return "explicit";
  }
  return "unknown";
}

namespace {

enumeration::SubgraphMode subgraph_mode_from_string(const std::string& s) {
  if (s == "series_parallel") return enumeration::SubgraphMode::kSeriesParallel;
  if (s == "increasing_trees") return enumeration::SubgraphMode::kIncreasingTrees;
  if (s == "all_trees") return enumeration::SubgraphMode::kAllTrees;
  throw ValidationError("unknown subgraph_mode '" + s + "'");
}

}  // namespace

void StudySpec::validate() const {
  if (loads_kw.empty()) throw ValidationError("study needs at least one device load");
  for (double l : loads_kw)
    if (!std::isfinite(l) || l < 0.0) throw ValidationError("device loads must be finite and non-negative");
  if (layout) {
    layout->validate();
    if (layout->device_count() != device_count())
      throw ValidationError("layout has " + std::to_string(layout->device_count()) + " devices but " +
                            std::to_string(device_count()) + " loads were given");
  }
  if (source == PopulationSource::kSpatialJunctions && !layout)
    throw ValidationError("spatial_junctions needs a device layout");
  if (source == PopulationSource::kExplicit && configs.empty())
    throw ValidationError("explicit strategy needs a non-empty configs list");
  if (num_levels < 1 || level < 1) throw ValidationError("num_levels and level must be at least 1");
  if (level > num_levels) throw ValidationError("level cannot exceed num_levels");
  if (junctions < 1 || junctions > device_count()) throw ValidationError("junctions must be in [1, device count]");
  if (workers < 1) throw ValidationError("workers must be at least 1");
  physics.validate();
  oloc.validate();
}

StudySpec spec_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ValidationError("study spec must be a JSON object");
  StudySpec s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "name") s.name = value.get<std::string>();
      else if (key == "layout") s.layout = spatial::layout_from_json(value);
      else if (key == "layout_file") {
        const fs::path p = base_dir / value.get<std::string>();
        std::ifstream in(p);
        if (!in) throw IoError("cannot open layout file " + p.string());
        s.layout = spatial::layout_from_json(nlohmann::json::parse(in));
      } else if (key == "loads_kw") s.loads_kw = value.get<std::vector<double>>();
      else if (key == "strategy") s.source = source_from_string(value.get<std::string>());
      else if (key == "configs") s.configs = value.get<std::vector<std::string>>();
      else if (key == "num_levels") s.num_levels = value.get<int>();
      else if (key == "level") s.level = value.get<int>();
      else if (key == "config_num") {
        if (!value.is_null()) s.config_num = value.get<std::uint64_t>();
      } else if (key == "junctions") s.junctions = value.get<int>();
      else if (key == "subgraph_mode") s.subgraph_mode = subgraph_mode_from_string(value.get<std::string>());
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else if (key == "physics") s.physics = thermal::params_from_json(value);
      else if (key == "oloc") s.oloc = oloc::options_from_json(value);
      else if (key == "workers") s.workers = value.get<int>();
      else if (key == "output_dir") s.output_dir = base_dir / value.get<std::string>();
      else if (key == "description") continue;
      else throw ValidationError("unknown study key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed study spec: ") + e.what());
  }
  if (s.loads_kw.empty() && s.layout) s.loads_kw = s.layout->heat_loads_kw;
  if (s.layout && s.layout->heat_loads_kw.empty()) s.layout->heat_loads_kw = s.loads_kw;
  s.validate();
  return s;
}

StudySpec load_spec(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open study spec " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("study spec is not valid JSON: ") + e.what(), e.byte);
  }
  return spec_from_json(j, file.parent_path());
}

int resolve_workers(int requested) {
  if (const char* env = std::getenv("THERMOFORGE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 1024));
  }
  return std::max(1, requested);
}

enumeration::GraphPopulation build_population(const StudySpec& spec) {
  const int n = spec.device_count();
  enumeration::GraphPopulation pop;
  switch (spec.source) {
    case PopulationSource::kSingleSplit:
      pop = enumeration::enumerate_single_split(n);
      break;
    case PopulationSource::kEnumeratedJunctions:
      pop = enumeration::enumerate_junction_placements(n, spec.junctions);
      break;
    case PopulationSource::kSpatialJunctions: {
      spatial::ClusterOptions co;
      co.seed = spec.seed;
      const auto tree = spatial::build_supernode_tree(*spec.layout, spec.num_levels, co);
      if (spec.level > tree.achieved_depth())
        throw ValidationError("level " + std::to_string(spec.level) + " requested but clustering reached depth " +
                              std::to_string(tree.achieved_depth()));
      if (spec.config_num) {
        pop = enumeration::GraphPopulation("spatial_junctions level " + std::to_string(spec.level) + " config " +
                                           std::to_string(*spec.config_num));
        pop.add(enumeration::level_graph_at(tree, spec.level, *spec.config_num, spec.subgraph_mode));
      } else {
        pop = enumeration::generate_level_graphs(tree, spec.level, spec.subgraph_mode);
      }
      break;
    }
    case PopulationSource::kExplicit:
      pop = enumeration::GraphPopulation("explicit configuration list");
      break;
  }
  for (const auto& c : spec.configs) pop.add(config::parse_notation(c));
  pop.sort_by_key();
  return pop;
}

Evaluation evaluate_config(const std::string& notation, const StudySpec& spec) {
  Evaluation ev;
  ev.notation = notation;
  try {
    const auto graph = config::parse_notation(notation);
    const int n = spec.device_count();
    if (graph.node_count() != n || graph.max_label() != n)
      throw ValidationError("configuration must contain exactly the devices 1.." + std::to_string(n));
    const auto pg = thermal::build_physics_graph(graph, thermal::loads_from_kw(spec.loads_kw), spec.physics);
    const auto model = thermal::assemble(pg);
    ev.solution =
        oloc::evaluate_endurance(model, pg.flow_map, thermal::LoadSchedule::constant(pg.load_vector()), spec.oloc);
    ev.ok = ev.solution.accepted;
  } catch (const std::exception& e) {
    ev.ok = false;
    ev.solution = {};
    ev.solution.status = "error";
    ev.solution.message = e.what();
  }
  return ev;
}

std::vector<Evaluation> evaluate_population(const enumeration::GraphPopulation& population, const StudySpec& spec,
                                            int workers) {
  const auto& keys = population.keys();
  std::vector<Evaluation> out(keys.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) out[i] = evaluate_config(keys[i], spec);
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(keys.size())));
  if (n == 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

std::vector<double> percentiles(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i) {
    const auto lower = std::lower_bound(sorted.begin(), sorted.end(), values[i]) - sorted.begin();
    out[i] = 100.0 * static_cast<double>(lower) / static_cast<double>(n - 1);
  }
  return out;
}

RankedPopulation rank(const std::vector<Evaluation>& evaluations) {
  RankedPopulation r;
  for (const auto& ev : evaluations) {
    RankedEntry e;
    e.notation = ev.notation;
    e.t_end = ev.solution.t_end;
    e.objective = ev.solution.objective;
    e.penalty = ev.solution.penalty;
    e.status = ev.solution.status;
    (ev.ok ? r.entries : r.failures).push_back(std::move(e));
  }
  if (r.entries.empty()) throw ValidationError("no configuration was solved successfully; nothing to rank");
  std::stable_sort(r.entries.begin(), r.entries.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.t_end != b.t_end) return a.t_end > b.t_end;
    return a.notation < b.notation;
  });
  std::sort(r.failures.begin(), r.failures.end(),
            [](const RankedEntry& a, const RankedEntry& b) { return a.notation < b.notation; });
  std::vector<double> t;
  for (const auto& e : r.entries) t.push_back(e.t_end);
  const auto pct = percentiles(t);
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    r.entries[i].rank = static_cast<int>(i) + 1;
    r.entries[i].percentile = pct[i];
  }
  return r;
}

StudyResult run_study(const StudySpec& spec) {
  spec.validate();
  StudyResult result;
  result.population = build_population(spec);
  result.evaluations = evaluate_population(result.population, spec, resolve_workers(spec.workers));
  try {
    result.ranking = rank(result.evaluations);
  } catch (const ValidationError&) {
    // Still leave the failure list behind for diagnosis.
    if (!spec.output_dir.empty()) report(result, spec, spec.output_dir);
    throw;
  }
  if (!spec.output_dir.empty()) report(result, spec, spec.output_dir);
  return result;
}

}  // namespace thermoforge::study

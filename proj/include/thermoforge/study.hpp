#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermoforge/enumeration.hpp"
#include "thermoforge/oloc.hpp"
#include "thermoforge/physics_graph.hpp"
#include "thermoforge/spatial.hpp"

namespace thermoforge::study {

/// How the population is produced. kExplicit evaluates only `configs`.
enum class PopulationSource { kSingleSplit, kSpatialJunctions, kEnumeratedJunctions, kExplicit };

PopulationSource source_from_string(const std::string& s);
std::string to_string(PopulationSource s);

struct StudySpec {
  std::string name = "study";
  std::optional<spatial::DeviceLayout> layout;  ///< required for spatial_junctions
  std::vector<double> loads_kw;                 ///< per label 1..N
  PopulationSource source = PopulationSource::kSingleSplit;
  std::vector<std::string> configs;             ///< added to (or, for kExplicit, forming) the population
  int num_levels = 1;
  int level = 1;
  std::optional<std::uint64_t> config_num;      ///< pick one graph of the level population
  int junctions = 1;
  enumeration::SubgraphMode subgraph_mode = enumeration::SubgraphMode::kSeriesParallel;
  std::uint64_t seed = 0;
  thermal::PhysicsParams physics;
  oloc::OlocOptions oloc;
  int workers = 1;
  std::filesystem::path output_dir;

  [[nodiscard]] int device_count() const noexcept { return static_cast<int>(loads_kw.size()); }
  void validate() const;
};

/// Parses a study file. Relative "layout_file" and "output_dir" entries are
/// resolved against `base_dir`. Unknown keys are rejected.
StudySpec spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
StudySpec load_spec(const std::filesystem::path& file);

/// Worker count: THERMOFORGE_WORKERS when set to a positive integer, else `requested`.
int resolve_workers(int requested);

enumeration::GraphPopulation build_population(const StudySpec& spec);

struct Evaluation {
  std::string notation;
  oloc::OlocSolution solution;
  bool ok = false;  ///< accepted solve; failures carry the reason in solution.status/message
};

struct RankedEntry {
  int rank = 0;
  std::string notation;
  double t_end = 0.0;
  double objective = 0.0;
  double penalty = 0.0;
  std::string status;
  double percentile = 0.0;
};

struct RankedPopulation {
  std::vector<RankedEntry> entries;  ///< descending t_end, ties by notation
  std::vector<RankedEntry> failures; ///< by notation; excluded from percentiles
};

/// Percentile of each value: 100 * (#values strictly lower) / (n - 1); 0 for n = 1.
std::vector<double> percentiles(const std::vector<double>& values);

/// Throws ValidationError when no evaluation succeeded.
RankedPopulation rank(const std::vector<Evaluation>& evaluations);

/// Evaluates one configuration; never throws for solver or model problems.
Evaluation evaluate_config(const std::string& notation, const StudySpec& spec);

/// Evaluates every graph, `workers` at a time; the result is in population order.
std::vector<Evaluation> evaluate_population(const enumeration::GraphPopulation& population, const StudySpec& spec,
                                            int workers);

struct StudyResult {
  enumeration::GraphPopulation population;
  std::vector<Evaluation> evaluations;
  RankedPopulation ranking;
};

/// Population, parallel evaluation and ranking; writes the report when the
/// spec names an output directory.
StudyResult run_study(const StudySpec& spec);

/// Writes population.json, ranking.csv, percentile.csv, failures.csv,
/// summary.txt and configs/config_NNN.{csv,json}. Throws IoError when the
/// directory cannot be written.
void report(const StudyResult& result, const StudySpec& spec, const std::filesystem::path& out_dir);

}  // namespace thermoforge::study

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "thermoforge/errors.hpp"
#include "thermoforge/study.hpp"

using namespace thermoforge;
using namespace thermoforge::study;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("thermoforge_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

StudySpec six_device_spec(std::vector<double> loads) {
  return spec_from_json(nlohmann::json{
      {"name", "six"},
      {"layout", {{"positions", {{2, 0, 0}, {2, 1, 0}, {3, 1, 0}, {12, 12, 0}, {15, 10, 0}, {13, 13, 0}}}}},
      {"loads_kw", loads},
      {"strategy", "spatial_junctions"},
      {"num_levels", 1},
      {"level", 1}});
}

Evaluation fake(const std::string& notation, double t, bool ok = true) {
  Evaluation e;
  e.notation = notation;
  e.ok = ok;
  e.solution.t_end = t;
  e.solution.objective = t;
  e.solution.status = ok ? "optimal" : "max iterations";
  return e;
}

}  // namespace

TEST(Percentiles, DefinitionCases) {
  EXPECT_EQ(percentiles({10, 20, 30}), (std::vector<double>{0, 50, 100}));
  EXPECT_EQ(percentiles({7, 7, 7}), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(percentiles({42}), (std::vector<double>{0}));
}

TEST(Percentiles, MatchBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(0, 9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(2 + trial % 15));
    for (auto& x : v) x = u(rng);
    const auto p = percentiles(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
      int lower = 0;
      for (double y : v) lower += y < v[i];
      EXPECT_DOUBLE_EQ(p[i], 100.0 * lower / static_cast<double>(v.size() - 1));
    }
  }
}

TEST(Rank, OrdersAndSeparatesFailures) {
  const auto r = rank({fake("0 (2)", 5.0), fake("0 (1)", 9.0), fake("0 (3)", 0.0, false), fake("0 (4)", 5.0)});
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_EQ(r.entries[0].notation, "0 (1)");
  EXPECT_EQ(r.entries[1].notation, "0 (2)");  // ties by notation
  EXPECT_EQ(r.entries[2].notation, "0 (4)");
  EXPECT_EQ(r.entries[0].rank, 1);
  EXPECT_DOUBLE_EQ(r.entries[0].percentile, 100.0);
  EXPECT_DOUBLE_EQ(r.entries[2].percentile, 0.0);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].notation, "0 (3)");
  EXPECT_THROW(rank({fake("0 (1)", 1.0, false)}), ValidationError);
}

TEST(Spec, JsonErrors) {
  EXPECT_THROW(spec_from_json(nlohmann::json{{"loads_kw", {1, 2}}, {"bogus", 1}}), ValidationError);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"loads_kw", {1, -2}}}), ValidationError);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"loads_kw", {1}}, {"strategy", "spatial_junctions"}}), ValidationError);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"loads_kw", {1}}, {"strategy", "explicit"}}), ValidationError);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"loads_kw", "many"}}), ValidationError);
  EXPECT_THROW(load_spec("/nonexistent/spec.json"), IoError);
}

TEST(Spec, WorkerOverrideFromEnvironment) {
  ::setenv("THERMOFORGE_WORKERS", "3", 1);
  EXPECT_EQ(resolve_workers(1), 3);
  ::setenv("THERMOFORGE_WORKERS", "zero", 1);
  EXPECT_EQ(resolve_workers(2), 2);
  ::unsetenv("THERMOFORGE_WORKERS");
  EXPECT_EQ(resolve_workers(5), 5);
}

TEST(Population, SixDeviceSpatialIsNine) {
  const auto pop = build_population(six_device_spec(std::vector<double>(6, 5.0)));
  EXPECT_EQ(pop.size(), 9u);
}

TEST(Population, SingleDeviceStudy) {
  auto spec = spec_from_json(nlohmann::json{{"loads_kw", {4}}});
  const auto result = run_study(spec);
  ASSERT_EQ(result.population.size(), 1u);
  ASSERT_EQ(result.ranking.entries.size(), 1u);
  EXPECT_EQ(result.ranking.entries[0].notation, "0 (1)");
  EXPECT_DOUBLE_EQ(result.ranking.entries[0].percentile, 0.0);
}

TEST(Population, BadConfigIsRecordedNotFatal) {
  auto spec = spec_from_json(nlohmann::json{{"loads_kw", {4, 2}}, {"configs", {"0 (1,3)"}}});
  const auto result = run_study(spec);
  EXPECT_EQ(result.population.size(), 4u);
  EXPECT_EQ(result.ranking.entries.size(), 3u);
  ASSERT_EQ(result.ranking.failures.size(), 1u);
  EXPECT_EQ(result.ranking.failures[0].status, "error");
}

TEST(Study, SerialAndParallelRankingsAgree) {
  auto spec = spec_from_json(nlohmann::json{{"loads_kw", {12, 4, 1}}});
  spec.workers = 1;
  const auto serial = run_study(spec);
  spec.workers = 4;
  const auto parallel = run_study(spec);
  ASSERT_EQ(serial.ranking.entries.size(), 13u);
  ASSERT_EQ(parallel.ranking.entries.size(), serial.ranking.entries.size());
  for (std::size_t i = 0; i < serial.ranking.entries.size(); ++i) {
    EXPECT_EQ(serial.ranking.entries[i].notation, parallel.ranking.entries[i].notation);
    EXPECT_EQ(serial.ranking.entries[i].t_end, parallel.ranking.entries[i].t_end);
  }
}

TEST(Study, ArtifactsAreByteIdenticalOnRerun) {
  auto spec = six_device_spec({5, 7, 6, 4, 5, 5});
  spec.workers = 2;
  const auto a = fresh_dir("a"), b = fresh_dir("b");
  spec.output_dir = a;
  const auto result = run_study(spec);
  spec.output_dir = b;
  spec.workers = 3;
  run_study(spec);

  std::size_t csv = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
    if (entry.path().extension() == ".csv" && rel.parent_path() == "configs") ++csv;
  }
  EXPECT_EQ(csv, 9u);
  std::ifstream ranking(a / "ranking.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(ranking, line)) ++rows;
  EXPECT_EQ(rows, 1u + 9u);
  const auto summary = slurp(a / "summary.txt");
  EXPECT_NE(summary.find("best: " + result.ranking.entries.front().notation), std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

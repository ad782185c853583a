#include <cstdio>
#include <fstream>
#include <sstream>

#include "thermoforge/errors.hpp"
#include "thermoforge/notation.hpp"
#include "thermoforge/study.hpp"
#include "thermoforge/thermal_model.hpp"

namespace thermoforge::study {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v == 0.0 ? 0.0 : v);
  return buf;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string config_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "config_%03zu", index);
  return buf;
}

}  // namespace

void report(const StudyResult& result, const StudySpec& spec, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir / "configs", ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  nlohmann::json pop = nlohmann::json::array();
  for (const auto& k : result.population.keys()) pop.push_back(k);
  write_file(out_dir / "population.json", pop.dump(2) + "\n");

  std::ostringstream ranking;
  ranking << "rank,notation,t_end_s,objective,penalty,status\n";
  for (const auto& e : result.ranking.entries)
    ranking << e.rank << ',' << quoted(e.notation) << ',' << fixed(e.t_end) << ',' << fixed(e.objective) << ','
            << fixed(e.penalty, 9) << ',' << quoted(e.status) << '\n';
  write_file(out_dir / "ranking.csv", ranking.str());

  std::ostringstream pct;
  pct << "notation,t_end_s,percentile\n";
  for (const auto& e : result.ranking.entries)
    pct << quoted(e.notation) << ',' << fixed(e.t_end) << ',' << fixed(e.percentile, 4) << '\n';
  write_file(out_dir / "percentile.csv", pct.str());

  std::ostringstream fail;
  fail << "notation,status,message\n";
  for (const auto& ev : result.evaluations)
    if (!ev.ok) fail << quoted(ev.notation) << ',' << quoted(ev.solution.status) << ',' << quoted(ev.solution.message) << '\n';
  write_file(out_dir / "failures.csv", fail.str());

  for (std::size_t i = 0; i < result.evaluations.size(); ++i) {
    const auto& ev = result.evaluations[i];
    const std::string stem = config_stem(i);
    write_file(out_dir / "configs" / (stem + ".json"), oloc::summary_json(ev.solution, ev.notation).dump(2) + "\n");
    if (ev.solution.times.empty()) continue;
    const auto graph = config::parse_notation(ev.notation);
    const auto pg = thermal::build_physics_graph(graph, thermal::loads_from_kw(spec.loads_kw), spec.physics);
    const auto model = thermal::assemble(pg);
    std::ostringstream csv;
    oloc::write_trajectory_csv(ev.solution, model, pg.flow_map, csv);
    write_file(out_dir / "configs" / (stem + ".csv"), csv.str());
  }

  const auto& entries = result.ranking.entries;
  std::ostringstream sum;
  sum << "study: " << spec.name << '\n';
  sum << "strategy: " << to_string(spec.source) << '\n';
  sum << "configurations: " << result.population.size() << " (" << entries.size() << " ranked, "
      << result.ranking.failures.size() << " failed)\n";
  if (!entries.empty()) {
    sum << "best: " << entries.front().notation << "  t_end = " << fixed(entries.front().t_end, 4) << " s\n";
    sum << "worst: " << entries.back().notation << "  t_end = " << fixed(entries.back().t_end, 4) << " s\n";
  }
  for (const auto& f : result.ranking.failures) sum << "failed: " << f.notation << "  (" << f.status << ")\n";
  write_file(out_dir / "summary.txt", sum.str());
}

}  // namespace thermoforge::study

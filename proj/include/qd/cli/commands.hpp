#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "qd/runner/parallel.hpp"
#include "qd/runner/sequential.hpp"
#include "qd/stats/log_fit.hpp"

namespace qd::cli {

class FeatureNotFound : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunSummary {
  std::string algorithm;
  std::uint64_t fitness_evaluations = 0;
  std::uint64_t agents_in_map = 0;
  int most_levels_solved = 0;
  double best_score = 0.0;
  std::optional<std::uint64_t> explore_map_size;  // EFME only
  std::optional<std::uint64_t> follow_map_size;
};

inline void write_summary(std::ostream& os, const RunSummary& s) {
  os << "algorithm=" << s.algorithm << '\n'
     << "fitness_evaluations=" << s.fitness_evaluations << '\n'
     << "agents_in_map_at_finish=" << s.agents_in_map << '\n'
     << "most_levels_solved=" << s.most_levels_solved << '\n'
     << "best_score=" << io::format_double(s.best_score) << '\n';
  if (s.explore_map_size)
    os << "explore_map_size=" << *s.explore_map_size << '\n';
  if (s.follow_map_size)
    os << "follow_map_size=" << *s.follow_map_size << '\n';
}

inline std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos)
      kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// Final-archive snapshot: all of the driver's maps, then the genome store.
inline void write_archive_snapshot(std::ostream& os,
                                   const algorithms::Driver& driver,
                                   std::uint64_t topology_hash) {
  auto maps = driver.maps();
  os << "archive " << maps.size() << '\n';
  for (const auto* m : maps) io::write_map(os, *m);
  io::write_store(os, driver.genomes(), topology_hash);
}

struct ArchiveSnapshot {
  std::vector<archive::EliteMap> maps;
  archive::GenomeStore store;
};

inline ArchiveSnapshot read_archive_snapshot(std::istream& is) {
  std::string tag;
  size_t n_maps = 0;
  if (!(is >> tag >> n_maps) || tag != "archive")
    throw io::CorruptSnapshot("bad archive snapshot header");
  is.ignore();
  ArchiveSnapshot snap;
  for (size_t i = 0; i < n_maps; ++i) snap.maps.push_back(io::read_map(is));
  snap.store = io::read_store(is);
  return snap;
}

inline RunSummary summarize(const config::ExperimentConfig& cfg,
                            const algorithms::Driver& driver,
                            std::uint64_t evaluations) {
  RunSummary s;
  s.algorithm = config::detail::algo_name(cfg.algorithm);
  s.fitness_evaluations = evaluations;
  auto stats = driver.primary_map().stats();
  s.agents_in_map = stats.occupied_cells;
  s.most_levels_solved = stats.most_levels_solved;
  s.best_score = stats.occupied_cells ? stats.best_score : 0.0;
  auto maps = driver.maps();
  if (maps.size() == 2) {
    s.explore_map_size = maps[0]->size();
    s.follow_map_size = maps[1]->size();
  }
  return s;
}

// Executes the configured experiment and writes runlog.csv, archive.qdm,
// summary.txt, and config.txt (the normalized config) into out_dir.
inline RunSummary cmd_run(const config::ExperimentConfig& cfg,
                          const std::string& out_dir,
                          runner::Clock clock = runner::system_clock_ms) {
  namespace fs = std::filesystem;
  config::validate(cfg);
  fs::create_directories(out_dir);

  const algorithms::Driver* driver = nullptr;
  const runner::RunLog* log = nullptr;
  std::unique_ptr<runner::SequentialRunner> seq;
  std::unique_ptr<runner::ParallelRunner> par;
  if (cfg.workers <= 0) {
    seq = std::make_unique<runner::SequentialRunner>(cfg, clock);
    seq->run_all();
    driver = &seq->driver();
    log = &seq->log();
  } else {
    par = std::make_unique<runner::ParallelRunner>(cfg, cfg.workers, clock);
    par->run_all();
    driver = &par->driver();
    log = &par->log();
  }

  {
    std::ofstream os(fs::path(out_dir) / "runlog.csv");
    log->write_csv(os);
  }
  {
    std::ofstream os(fs::path(out_dir) / "archive.qdm");
    write_archive_snapshot(os, *driver, config::make_topology(cfg).hash());
  }
  {
    std::ofstream os(fs::path(out_dir) / "config.txt");
    config::write_config(os, cfg);
  }
  auto summary = summarize(cfg, *driver, cfg.budget);
  {
    std::ofstream os(fs::path(out_dir) / "summary.txt");
    write_summary(os, summary);
  }
  return summary;
}

struct TrajectoryRecord {
  int tick = 0;
  env::Action action = env::Action::Up;
  env::Cell avatar;
  double score = 0.0;
};

inline const char* action_name(env::Action a) {
  switch (a) {
    case env::Action::Up: return "up";
    case env::Action::Down: return "down";
    case env::Action::Left: return "left";
    case env::Action::Right: return "right";
    case env::Action::Use: return "use";
  }
  return "?";
}

// Re-executes an archived elite on one level and records its trajectory.
// The environment is deterministic, so the replayed episode reproduces the
// archived outcome.
inline std::vector<TrajectoryRecord> cmd_replay(
    const std::string& archive_path, const std::string& feature_string,
    int level_index, const config::ExperimentConfig& cfg,
    const std::string& out_path) {
  auto levels = config::load_levels(cfg.level_manifest);
  if (level_index < 0 || level_index >= static_cast<int>(levels.size()))
    throw std::out_of_range("level index out of range");
  auto scheme = config::make_scheme(cfg, static_cast<int>(levels.size()));
  auto topo = config::make_topology(cfg);

  std::ifstream is(archive_path);
  if (!is) throw std::runtime_error("cannot open archive: " + archive_path);
  auto snap = read_archive_snapshot(is);

  auto feature = archive::feature_from_string(feature_string, scheme);
  const archive::EliteEntry* entry = nullptr;
  for (const auto& m : snap.maps)
    if ((entry = m.find(feature)) != nullptr) break;
  if (!entry)
    throw FeatureNotFound("no elite for feature " + feature_string);

  const auto& genome = snap.store.get(entry->genome_id);
  const auto& level = levels[level_index];

  std::vector<TrajectoryRecord> traj;
  auto state = env::reset(level);
  while (state.terminal == env::Terminal::Running) {
    auto obs = policy::encode(state, level, cfg.observation);
    auto action =
        policy::select_action(policy::forward(genome.params, topo, obs));
    env::step(state, level, action, cfg.env);
    traj.push_back({state.tick, action, state.avatar_pos, state.score});
  }

  std::ofstream os(out_path);
  os << "tick,action,avatar_x,avatar_y,score\n";
  for (const auto& t : traj)
    os << t.tick << ',' << action_name(t.action) << ',' << t.avatar.col << ','
       << t.avatar.row << ',' << io::format_double(t.score) << '\n';
  return traj;
}

struct StatsReport {
  std::uint64_t evaluations = 0;
  std::uint64_t final_archive_size = 0;
  int most_levels_solved = 0;
  std::optional<stats::LogFit> fit;
  std::optional<double> evals_to_target;
  double target = 300.0;
};

inline StatsReport cmd_stats(const std::string& runlog_path,
                             double target = 300.0) {
  std::ifstream is(runlog_path);
  if (!is) throw runner::MalformedLog("cannot open run log", 0);
  auto log = runner::RunLog::read_csv(is);
  StatsReport rep;
  rep.target = target;
  const auto& recs = log.records();
  rep.evaluations = recs.back().evaluation_index;
  rep.final_archive_size = recs.back().archive_size;
  rep.most_levels_solved = recs.back().most_levels_solved;

  std::vector<std::pair<double, double>> pts;
  pts.reserve(recs.size());
  for (const auto& r : recs)
    pts.emplace_back(static_cast<double>(r.evaluation_index),
                     static_cast<double>(r.archive_size));
  try {
    rep.fit = stats::fit_log_curve(pts);
    if (rep.fit->a != 0.0)
      rep.evals_to_target = stats::extrapolate_evaluations(*rep.fit, target);
  } catch (const stats::DegenerateFit&) {
    // short or flat logs simply omit the fit
  }
  return rep;
}

inline void write_stats_report(std::ostream& os, const StatsReport& r) {
  os << "evaluations=" << r.evaluations << '\n'
     << "agents_in_map=" << r.final_archive_size << '\n'
     << "most_levels_solved=" << r.most_levels_solved << '\n';
  if (r.fit) {
    os << "logfit_a=" << io::format_double(r.fit->a) << '\n'
       << "logfit_b=" << io::format_double(r.fit->b) << '\n'
       << "logfit_r_squared=" << io::format_double(r.fit->r_squared) << '\n';
    if (r.evals_to_target)
      os << "evaluations_to_reach_" << r.target << "="
         << io::format_double(*r.evals_to_target) << '\n';
  }
}

// Collates summary.txt files from several run directories into one
// CSV table with the standard result columns.
inline void cmd_export_table(const std::vector<std::string>& run_dirs,
                             std::ostream& os) {
  os << "run,algorithm,fitness_evaluations,agents_in_map_at_finish,"
        "most_levels_solved\n";
  for (const auto& dir : run_dirs) {
    auto kv = read_kv((std::filesystem::path(dir) / "summary.txt").string());
    os << dir << ',' << kv["algorithm"] << ',' << kv["fitness_evaluations"]
       << ',' << kv["agents_in_map_at_finish"] << ','
       << kv["most_levels_solved"] << '\n';
  }
}

}  // namespace qd::cli

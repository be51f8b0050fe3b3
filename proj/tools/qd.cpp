// Command-line front end: run experiments, replay archived elites, report
// run statistics, and export result tables.

#include <CLI11.hpp>
#include <iostream>

#include "qd/cli/commands.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quality-diversity neuroevolution experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", archive_path, feature_string,
              runlog_path, out_path = "trajectory.csv";
  int workers = -1, level_index = 0;
  std::int64_t seed = -1;
  double target = 300.0;
  std::vector<std::string> run_dirs;

  auto* run = app.add_subcommand("run", "Run a configured experiment");
  run->add_option("--config", config_path, "Experiment config file")
      ->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--workers", workers, "Override worker count (0=sequential)");
  run->add_option("--seed", seed, "Override the config's seed");

  auto* replay = app.add_subcommand("replay", "Replay an archived elite");
  replay->add_option("--config", config_path, "Experiment config file")
      ->required();
  replay->add_option("--archive", archive_path, "Archive snapshot (.qdm)")
      ->required();
  replay->add_option("--feature", feature_string, "Feature string, e.g. 1-0-...")
      ->required();
  replay->add_option("--level", level_index, "Level index to replay");
  replay->add_option("--out", out_path, "Trajectory CSV output path");

  auto* stats = app.add_subcommand("stats", "Report run-log statistics");
  stats->add_option("--runlog", runlog_path, "Run log CSV")->required();
  stats->add_option("--target", target, "Archive size to extrapolate to");

  auto* table = app.add_subcommand("export-table",
                                   "Collate run summaries into a CSV table");
  table->add_option("dirs", run_dirs, "Run output directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run->parsed()) {
      auto cfg = qd::config::load_config(config_path);
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (workers >= 0) cfg.workers = workers;
      qd::config::validate(cfg);
      auto summary = qd::cli::cmd_run(cfg, out_dir);
      qd::cli::write_summary(std::cout, summary);
    } else if (replay->parsed()) {
      auto cfg = qd::config::load_config(config_path);
      auto traj = qd::cli::cmd_replay(archive_path, feature_string,
                                      level_index, cfg, out_path);
      std::cout << "replayed " << traj.size() << " ticks, final score "
                << (traj.empty() ? 0.0 : traj.back().score) << '\n';
    } else if (stats->parsed()) {
      auto rep = qd::cli::cmd_stats(runlog_path, target);
      qd::cli::write_stats_report(std::cout, rep);
    } else if (table->parsed()) {
      qd::cli::cmd_export_table(run_dirs, std::cout);
    }
  } catch (const qd::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const qd::env::MalformedLevel& e) {
    std::cerr << "level error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

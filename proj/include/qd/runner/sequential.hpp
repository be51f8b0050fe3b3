#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "qd/algorithms/evaluate.hpp"
#include "qd/config/experiment_config.hpp"
#include "qd/runner/run_log.hpp"

namespace qd::runner {

class CorruptCheckpoint : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Single-threaded budgeted loop: propose, evaluate, apply, log. Owns all
// mutable search state; bit-reproducible per seed, checkpointable at any
// evaluation boundary.
class SequentialRunner {
 public:
  SequentialRunner(config::ExperimentConfig cfg, Clock clock = system_clock_ms)
      : cfg_(std::move(cfg)),
        clock_(std::move(clock)),
        levels_(config::load_levels(cfg_.level_manifest)),
        topo_(config::make_topology(cfg_)),
        scheme_(config::make_scheme(cfg_, static_cast<int>(levels_.size()))),
        driver_(config::make_driver(cfg_, static_cast<int>(levels_.size()))),
        rng_(cfg_.seed) {
    config::validate(cfg_);
  }

  const config::ExperimentConfig& config() const { return cfg_; }
  const std::vector<env::Level>& levels() const { return levels_; }
  const algorithms::Driver& driver() const { return *driver_; }
  algorithms::Driver& driver() { return *driver_; }
  const RunLog& log() const { return log_; }
  std::uint64_t evaluations_done() const { return evaluations_done_; }

  // Advance until `target` evaluations have been applied in total.
  void run_to(std::uint64_t target) {
    while (evaluations_done_ < target) {
      auto genome = driver_->propose(rng_, ids_);
      auto result = algorithms::evaluate_candidate(
          genome, levels_, cfg_.env, topo_, cfg_.observation, scheme_);
      ++evaluations_done_;
      bool accepted =
          driver_->apply(genome, result, evaluations_done_, rng_, ids_);
      auto stats = driver_->primary_map().stats();
      RunLogRecord rec;
      rec.evaluation_index = evaluations_done_;
      rec.archive_size = stats.occupied_cells;
      rec.most_levels_solved = stats.most_levels_solved;
      rec.best_score = stats.occupied_cells ? stats.best_score : 0.0;
      rec.accepted = accepted;
      rec.unix_ms = clock_();
      log_.append(rec);
    }
  }

  void run_all() { run_to(cfg_.budget); }

  // Checkpoint directory: manifest with config hash and counters, rng
  // state, driver state (archives + genomes), and the log so far.
  void checkpoint(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
      std::ofstream os(fs::path(dir) / "manifest.txt");
      os << "config_hash " << config::config_hash(cfg_) << '\n'
         << "evaluations_done " << evaluations_done_ << '\n'
         << "next_genome_id " << ids_.peek() << '\n'
         << "level_count " << levels_.size() << '\n';
    }
    {
      std::ofstream os(fs::path(dir) / "rng.txt");
      os << rng_;
    }
    {
      std::ofstream os(fs::path(dir) / "driver.txt");
      driver_->save(os);
    }
    {
      std::ofstream os(fs::path(dir) / "runlog.csv");
      log_.write_csv(os);
    }
  }

  void restore(const std::string& dir) {
    namespace fs = std::filesystem;
    try {
      std::ifstream ms(fs::path(dir) / "manifest.txt");
      if (!ms) throw CorruptCheckpoint("missing manifest: " + dir);
      std::string key;
      std::uint64_t cfg_hash = 0, next_id = 0, level_count = 0;
      if (!(ms >> key >> cfg_hash) || key != "config_hash")
        throw CorruptCheckpoint("bad manifest (config_hash)");
      if (!(ms >> key >> evaluations_done_) || key != "evaluations_done")
        throw CorruptCheckpoint("bad manifest (evaluations_done)");
      if (!(ms >> key >> next_id) || key != "next_genome_id")
        throw CorruptCheckpoint("bad manifest (next_genome_id)");
      if (!(ms >> key >> level_count) || key != "level_count")
        throw CorruptCheckpoint("bad manifest (level_count)");
      if (cfg_hash != config::config_hash(cfg_))
        throw CorruptCheckpoint("checkpoint was written by another config");
      if (level_count != levels_.size())
        throw CorruptCheckpoint("level set changed since checkpoint");
      ids_.set(next_id);

      std::ifstream rs(fs::path(dir) / "rng.txt");
      if (!(rs >> rng_)) throw CorruptCheckpoint("bad rng state");

      std::ifstream ds(fs::path(dir) / "driver.txt");
      if (!ds) throw CorruptCheckpoint("missing driver state");
      driver_->load(ds);

      std::ifstream ls(fs::path(dir) / "runlog.csv");
      if (!ls) throw CorruptCheckpoint("missing run log");
      log_ = RunLog::read_csv(ls);
      if (log_.size() != evaluations_done_)
        throw CorruptCheckpoint("run log length disagrees with manifest");
    } catch (const io::CorruptSnapshot& e) {
      throw CorruptCheckpoint(e.what());
    } catch (const MalformedLog& e) {
      throw CorruptCheckpoint(e.what());
    }
  }

 private:
  config::ExperimentConfig cfg_;
  Clock clock_;
  std::vector<env::Level> levels_;
  policy::NetworkTopology topo_;
  archive::FeatureScheme scheme_;
  std::unique_ptr<algorithms::Driver> driver_;
  Rng rng_;
  IdSource ids_;
  RunLog log_;
  std::uint64_t evaluations_done_ = 0;
};

}  // namespace qd::runner

#pragma once

#include "qd/algorithms/driver.hpp"
#include "qd/algorithms/vme.hpp"
#include "qd/io/snapshot.hpp"

namespace qd::algorithms {

struct EfmeConfig {
  std::uint64_t startup = 100;  // evaluations sourced from explore only
  double explore_ratio = 0.5;   // P(parent drawn from explore map)
};

// Explorer-Follower MAP-Elites. Two archives over the same feature scheme:
// the explore map keeps the highest-scoring agent per cell, the follow map
// the lowest-timestep one. Parents come from the explore map during
// startup and with probability explore_ratio afterwards; every evaluated
// agent may update either or both maps.
class EfmeDriver : public Driver {
 public:
  EfmeDriver(archive::FeatureScheme scheme, size_t param_count,
             EfmeConfig cfg, VmeConfig mutation, std::uint64_t topology_hash)
      : explore_(scheme, archive::Criterion::MaxScore),
        follow_(scheme, archive::Criterion::MinTimesteps),
        cfg_(cfg),
        mutation_(mutation),
        param_count_(param_count),
        topology_hash_(topology_hash) {}

  policy::Genome propose(Rng& rng, IdSource& ids) override {
    bool from_explore;
    if (count_evaluated_ < cfg_.startup) {
      from_explore = true;
    } else {
      from_explore = uniform_real(rng) < cfg_.explore_ratio;
      if (from_explore) ++explore_draws_; else ++follow_draws_;
    }
    return new_agent(from_explore ? explore_ : follow_, rng, ids);
  }

  bool apply(const policy::Genome& genome,
             const archive::EvaluationResult& result,
             std::uint64_t eval_index, Rng&, IdSource&) override {
    ++count_evaluated_;
    archive::EliteEntry e{genome.id, result.total_score,
                          result.total_timesteps, eval_index};
    bool ea = detail::insert_tracked(explore_, store_, genome, result.feature,
                                     e);
    bool fa = detail::insert_tracked(follow_, store_, genome, result.feature,
                                     e);
    return ea || fa;
  }

  const archive::EliteMap& primary_map() const override { return explore_; }
  const archive::EliteMap& explore_map() const { return explore_; }
  const archive::EliteMap& follow_map() const { return follow_; }
  std::vector<const archive::EliteMap*> maps() const override {
    return {&explore_, &follow_};
  }
  const archive::GenomeStore& genomes() const override { return store_; }

  std::uint64_t count_evaluated() const { return count_evaluated_; }
  std::uint64_t explore_draws() const { return explore_draws_; }
  std::uint64_t follow_draws() const { return follow_draws_; }

  void save(std::ostream& os) const override {
    os << "efme " << count_evaluated_ << ' ' << explore_draws_ << ' '
       << follow_draws_ << '\n';
    io::write_map(os, explore_);
    io::write_map(os, follow_);
    io::write_store(os, store_, topology_hash_);
  }
  void load(std::istream& is) override {
    std::string tag;
    is >> tag >> count_evaluated_ >> explore_draws_ >> follow_draws_;
    if (tag != "efme") throw io::CorruptSnapshot("bad efme state header");
    is.ignore();  // trailing newline
    explore_ = io::read_map(is);
    follow_ = io::read_map(is);
    store_ = io::read_store(is);
  }

 private:
  policy::Genome new_agent(const archive::EliteMap& map, Rng& rng,
                           IdSource& ids) {
    if (map.empty())
      return policy::init_genome(rng, param_count_, mutation_.init_std, ids);
    const auto& elite = map.select_random(rng);
    return policy::mutate(store_.get(elite.genome_id), rng,
                          mutation_.change_prob, mutation_.noise_std, ids,
                          mutation_.mutation_mode);
  }

  archive::EliteMap explore_;
  archive::EliteMap follow_;
  archive::GenomeStore store_;
  EfmeConfig cfg_;
  VmeConfig mutation_;
  size_t param_count_;
  std::uint64_t topology_hash_;
  std::uint64_t count_evaluated_ = 0;
  std::uint64_t explore_draws_ = 0;
  std::uint64_t follow_draws_ = 0;
};

}  // namespace qd::algorithms

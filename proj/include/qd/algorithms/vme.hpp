#pragma once

#include "qd/algorithms/driver.hpp"
#include "qd/io/snapshot.hpp"

namespace qd::algorithms {

struct VmeConfig {
  double change_prob = 0.7;
  double noise_std = 0.03;
  double init_std = 0.1;
  policy::MutationMode mutation_mode = policy::MutationMode::Additive;
};

// Vanilla MAP-Elites: mutate a uniformly chosen elite, insert by score.
class VmeDriver : public Driver {
 public:
  VmeDriver(archive::FeatureScheme scheme, size_t param_count,
            VmeConfig cfg, std::uint64_t topology_hash)
      : map_(scheme, archive::Criterion::MaxScore),
        cfg_(cfg),
        param_count_(param_count),
        topology_hash_(topology_hash) {}

  policy::Genome propose(Rng& rng, IdSource& ids) override {
    if (map_.empty())
      return policy::init_genome(rng, param_count_, cfg_.init_std, ids);
    const auto& elite = map_.select_random(rng);
    return policy::mutate(store_.get(elite.genome_id), rng, cfg_.change_prob,
                          cfg_.noise_std, ids, cfg_.mutation_mode);
  }

  bool apply(const policy::Genome& genome,
             const archive::EvaluationResult& result,
             std::uint64_t eval_index, Rng&, IdSource&) override {
    archive::EliteEntry e{genome.id, result.total_score,
                          result.total_timesteps, eval_index};
    return detail::insert_tracked(map_, store_, genome, result.feature, e);
  }

  const archive::EliteMap& primary_map() const override { return map_; }
  std::vector<const archive::EliteMap*> maps() const override {
    return {&map_};
  }
  const archive::GenomeStore& genomes() const override { return store_; }

  void save(std::ostream& os) const override {
    io::write_map(os, map_);
    io::write_store(os, store_, topology_hash_);
  }
  void load(std::istream& is) override {
    map_ = io::read_map(is);
    store_ = io::read_store(is);
  }

 private:
  archive::EliteMap map_;
  archive::GenomeStore store_;
  VmeConfig cfg_;
  size_t param_count_;
  std::uint64_t topology_hash_;
};

}  // namespace qd::algorithms

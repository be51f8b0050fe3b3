#pragma once

#include "qd/algorithms/driver.hpp"
#include "qd/algorithms/vme.hpp"
#include "qd/io/snapshot.hpp"

namespace qd::algorithms {

struct DmeConfig {
  double F = 0.5;   // differential weight
  double CR = 0.9;  // crossover rate
  bool crossover_enabled = true;
};

inline std::vector<double> dme_donor(const std::vector<double>& a,
                                     const std::vector<double>& b,
                                     const std::vector<double>& c, double F) {
  std::vector<double> donor(a.size());
  for (size_t j = 0; j < a.size(); ++j)
    donor[j] = a[j] + F * (b[j] - c[j]);
  return donor;
}

// Differential MAP-Elites: rand/1 donor a + F*(b - c) over three distinct
// elites, optional binomial crossover against a. Falls back to vanilla
// mutation while fewer than three cells are occupied.
class DmeDriver : public Driver {
 public:
  DmeDriver(archive::FeatureScheme scheme, size_t param_count, DmeConfig cfg,
            VmeConfig fallback, std::uint64_t topology_hash)
      : map_(scheme, archive::Criterion::MaxScore),
        cfg_(cfg),
        fallback_(fallback),
        param_count_(param_count),
        topology_hash_(topology_hash) {}

  policy::Genome propose(Rng& rng, IdSource& ids) override {
    if (map_.size() < 3) {
      if (map_.empty())
        return policy::init_genome(rng, param_count_, fallback_.init_std, ids);
      const auto& elite = map_.select_random(rng);
      return policy::mutate(store_.get(elite.genome_id), rng,
                            fallback_.change_prob, fallback_.noise_std, ids,
                            fallback_.mutation_mode);
    }

    auto n = map_.size();
    std::uint64_t ia = uniform_index(rng, n), ib, ic;
    do ib = uniform_index(rng, n); while (ib == ia);
    do ic = uniform_index(rng, n); while (ic == ia || ic == ib);
    const auto& a = store_.get(cell_at(ia).genome_id);
    const auto& b = store_.get(cell_at(ib).genome_id);
    const auto& c = store_.get(cell_at(ic).genome_id);

    policy::Genome child;
    child.id = ids.next();
    child.parent_id = a.id;
    child.params.resize(a.size());
    auto donor = dme_donor(a.params, b.params, c.params, cfg_.F);
    if (!cfg_.crossover_enabled) {
      child.params = std::move(donor);  // "removed crossover" mode
    } else {
      size_t forced = uniform_index(rng, a.size());
      for (size_t j = 0; j < a.size(); ++j) {
        bool take = uniform_real(rng) < cfg_.CR || j == forced;
        child.params[j] = take ? donor[j] : a.params[j];
      }
    }
    return child;
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
  const archive::EliteEntry& cell_at(std::uint64_t idx) const {
    auto it = map_.cells().begin();
    std::advance(it, static_cast<long>(idx));
    return it->second;
  }

  archive::EliteMap map_;
  archive::GenomeStore store_;
  DmeConfig cfg_;
  VmeConfig fallback_;
  size_t param_count_;
  std::uint64_t topology_hash_;
};

}  // namespace qd::algorithms

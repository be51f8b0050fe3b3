#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <vector>

#include "qd/archive/elite_map.hpp"
#include "qd/archive/genome_store.hpp"
#include "qd/common.hpp"
#include "qd/policy/genome.hpp"

namespace qd::algorithms {

// A search driver owns its archive(s) and genome store, proposes one
// candidate at a time, and consumes evaluation results. Single-owner: only
// the runner's master loop calls into it.
class Driver {
 public:
  virtual ~Driver() = default;

  virtual policy::Genome propose(Rng& rng, IdSource& ids) = 0;

  // eval_index is 1-based; returns whether any map accepted the candidate.
  virtual bool apply(const policy::Genome& genome,
                     const archive::EvaluationResult& result,
                     std::uint64_t eval_index, Rng& rng, IdSource& ids) = 0;

  // Map used for run-log statistics (the explore map for EFME).
  virtual const archive::EliteMap& primary_map() const = 0;
  virtual std::vector<const archive::EliteMap*> maps() const = 0;
  virtual const archive::GenomeStore& genomes() const = 0;

  virtual void save(std::ostream& os) const = 0;
  virtual void load(std::istream& is) = 0;
};

namespace detail {

// try_insert plus genome-store reference maintenance.
inline bool insert_tracked(archive::EliteMap& map, archive::GenomeStore& store,
                           const policy::Genome& genome,
                           const archive::BehaviorFeature& feature,
                           const archive::EliteEntry& entry) {
  const archive::EliteEntry* prev = map.find(feature);
  std::uint64_t prev_id = prev ? prev->genome_id : 0;
  bool replaced = prev != nullptr;
  bool accepted = map.try_insert(feature, entry);
  if (accepted) {
    store.retain(genome);
    if (replaced) store.release(prev_id);
  }
  return accepted;
}

}  // namespace detail

}  // namespace qd::algorithms

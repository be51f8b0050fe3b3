#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qd/common.hpp"

namespace qd::policy {

// Flat parameter vector of the policy network; immutable after creation.
struct Genome {
  std::uint64_t id = 0;
  std::optional<std::uint64_t> parent_id;
  std::vector<double> params;

  size_t size() const { return params.size(); }
};

inline Genome init_genome(Rng& rng, size_t param_count, double init_std,
                          IdSource& ids) {
  Genome g;
  g.id = ids.next();
  g.params.resize(param_count);
  for (auto& p : g.params) p = normal(rng, 0.0, init_std);
  return g;
}

enum class MutationMode { Additive, Replace };

// Each parameter is touched independently with probability change_prob.
// Additive mode perturbs with zero-mean Gaussian noise of the given std;
// Replace mode draws the new value outright from that Gaussian.
inline Genome mutate(const Genome& parent, Rng& rng, double change_prob,
                     double noise_std, IdSource& ids,
                     MutationMode mode = MutationMode::Additive) {
  Genome child;
  child.id = ids.next();
  child.parent_id = parent.id;
  child.params = parent.params;
  for (auto& p : child.params) {
    if (uniform_real(rng) < change_prob) {
      double n = normal(rng, 0.0, noise_std);
      p = mode == MutationMode::Additive ? p + n : n;
    }
  }
  return child;
}

}  // namespace qd::policy

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "qd/archive/feature.hpp"
#include "qd/common.hpp"
#include "qd/env/game.hpp"

namespace qd::archive {

class EmptyMap : public std::runtime_error {
 public:
  EmptyMap() : std::runtime_error("elite map is empty") {}
};

struct EliteEntry {
  std::uint64_t genome_id = 0;
  double score = 0.0;
  std::int64_t timesteps = 0;
  std::uint64_t found_at = 0;  // evaluation counter at discovery
};

enum class Criterion { MaxScore, MinTimesteps };

struct MapStats {
  std::uint64_t occupied_cells = 0;
  int most_levels_solved = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  std::int64_t min_total_timesteps =
      std::numeric_limits<std::int64_t>::max();
};

// One elite per behavior feature. MaxScore cells keep the strictly
// higher-scoring entry, MinTimesteps the strictly lower-step one; ties keep
// the incumbent, so duplicate evaluations cannot churn the map.
class EliteMap {
 public:
  EliteMap() = default;
  EliteMap(FeatureScheme scheme, Criterion criterion)
      : scheme_(scheme), criterion_(criterion) {}

  const FeatureScheme& scheme() const { return scheme_; }
  Criterion criterion() const { return criterion_; }
  std::uint64_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }
  const std::map<std::uint64_t, EliteEntry>& cells() const { return cells_; }

  const EliteEntry* find(const BehaviorFeature& f) const {
    auto it = cells_.find(f.bits);
    return it == cells_.end() ? nullptr : &it->second;
  }

  bool try_insert(const BehaviorFeature& feature, const EliteEntry& entry) {
    if (feature.scheme != scheme_)
      throw SchemeMismatch("feature scheme does not match map scheme");
    auto it = cells_.find(feature.bits);
    if (it == cells_.end()) {
      cells_.emplace(feature.bits, entry);
      return true;
    }
    bool better = criterion_ == Criterion::MaxScore
                      ? entry.score > it->second.score
                      : entry.timesteps < it->second.timesteps;
    if (better) it->second = entry;
    return better;
  }

  // Uniform over occupied cells; deterministic given the rng state.
  const EliteEntry& select_random(Rng& rng) const {
    if (cells_.empty()) throw EmptyMap();
    auto idx = uniform_index(rng, cells_.size());
    auto it = cells_.begin();
    std::advance(it, static_cast<long>(idx));
    return it->second;
  }

  MapStats stats() const {
    MapStats s;
    s.occupied_cells = cells_.size();
    for (const auto& [bits, entry] : cells_) {
      BehaviorFeature f{scheme_, bits};
      s.most_levels_solved = std::max(s.most_levels_solved, f.wins());
      s.best_score = std::max(s.best_score, entry.score);
      s.min_total_timesteps = std::min(s.min_total_timesteps, entry.timesteps);
    }
    return s;
  }

 private:
  FeatureScheme scheme_;
  Criterion criterion_ = Criterion::MaxScore;
  std::map<std::uint64_t, EliteEntry> cells_;
};

// One fitness evaluation: per-level outcomes plus aggregates.
struct EvaluationResult {
  std::vector<env::EpisodeResult> per_level;
  BehaviorFeature feature;
  double total_score = 0.0;
  std::int64_t total_timesteps = 0;

  bool operator==(const EvaluationResult&) const = default;
};

}  // namespace qd::archive

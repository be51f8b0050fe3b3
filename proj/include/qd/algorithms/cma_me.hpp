#pragma once

#include <algorithm>
#include <deque>
#include <optional>

#include "qd/algorithms/cma_es.hpp"
#include "qd/algorithms/driver.hpp"
#include "qd/io/snapshot.hpp"

namespace qd::algorithms {

class RestartTooEarly : public std::logic_error {
 public:
  RestartTooEarly()
      : std::logic_error("emitter restart before threshold reached") {}
};

struct CmaMeConfig {
  int lambda = 0;            // 0 = CMA-ES default for the dimension
  double sigma0 = 0.3;
  bool full_covariance = false;  // full matrix only viable for small dims
  int restart_threshold = 20;    // generations without archive improvement
  double init_std = 0.1;         // bootstrap genome draw
};

// CMA-ME: a single CMA-ES emitter feeding a MAP-Elites archive. Candidates
// are ranked by archive improvement (new cell > replacement by score delta
// > rejected by score); an emitter that goes restart_threshold generations
// without any acceptance restarts from a random elite.
class CmaMeDriver : public Driver {
 public:
  CmaMeDriver(archive::FeatureScheme scheme, size_t param_count,
              CmaMeConfig cfg, std::uint64_t topology_hash)
      : map_(scheme, archive::Criterion::MaxScore),
        cfg_(cfg),
        param_count_(param_count),
        topology_hash_(topology_hash),
        emitter_(std::vector<double>(param_count, 0.0), cfg.sigma0,
                 !cfg.full_covariance, cfg.lambda) {}

  policy::Genome propose(Rng& rng, IdSource& ids) override {
    if (queue_.empty()) sample_batch(rng, ids);
    policy::Genome g = std::move(queue_.front());
    queue_.pop_front();
    return g;
  }

  bool apply(const policy::Genome& genome,
             const archive::EvaluationResult& result,
             std::uint64_t eval_index, Rng& rng, IdSource& ids) override {
    archive::EliteEntry e{genome.id, result.total_score,
                          result.total_timesteps, eval_index};
    const archive::EliteEntry* prev = map_.find(result.feature);
    double prev_score = prev ? prev->score : 0.0;
    bool was_empty = prev == nullptr;
    bool accepted =
        detail::insert_tracked(map_, store_, genome, result.feature, e);

    Outcome out;
    out.cls = !accepted ? 0 : was_empty ? 2 : 1;
    out.key = out.cls == 1 ? result.total_score - prev_score
                           : result.total_score;

    for (auto& batch : batches_) {
      for (size_t i = 0; i < batch.ids.size(); ++i) {
        if (batch.ids[i] == genome.id && !batch.outcomes[i]) {
          batch.outcomes[i] = out;
          batch.received += 1;
          break;
        }
      }
    }
    while (!batches_.empty() &&
           batches_.front().received ==
               static_cast<int>(batches_.front().ids.size())) {
      // move out first: a restart inside finish_batch clears the deque
      Batch done = std::move(batches_.front());
      batches_.pop_front();
      finish_batch(done, rng, ids);
    }
    return accepted;
  }

  int gens_since_improvement() const { return gens_since_improvement_; }
  const CmaEs& emitter() const { return emitter_; }

  // Restart the emitter around a random elite (or a fresh random mean when
  // the archive is empty). Guarded by the improvement threshold.
  void restart(Rng& rng, IdSource& ids) {
    if (gens_since_improvement_ < cfg_.restart_threshold)
      throw RestartTooEarly();
    force_restart(rng, ids);
  }

  const archive::EliteMap& primary_map() const override { return map_; }
  std::vector<const archive::EliteMap*> maps() const override {
    return {&map_};
  }
  const archive::GenomeStore& genomes() const override { return store_; }

  void save(std::ostream& os) const override {
    io::write_map(os, map_);
    io::write_store(os, store_, topology_hash_);
    os << "cmame " << gens_since_improvement_ << '\n';
    emitter_.save([&](const char*, double v) {
      os << io::format_double(v) << '\n';
    });
    os << "queue " << queue_.size() << '\n';
    for (const auto& g : queue_) io::write_genome(os, g, topology_hash_);
    os << "batches " << batches_.size() << '\n';
    for (const auto& b : batches_) {
      os << "batch " << b.ids.size() << ' ' << b.received << '\n';
      for (size_t i = 0; i < b.ids.size(); ++i) {
        const auto& o = b.outcomes[i];
        os << b.ids[i] << ' ' << (o ? 1 : 0) << ' ' << (o ? o->cls : 0) << ' '
           << io::format_double(o ? o->key : 0.0) << '\n';
        for (double y : b.ys[i]) os << io::format_double(y) << '\n';
      }
    }
  }

  void load(std::istream& is) override {
    map_ = io::read_map(is);
    store_ = io::read_store(is);
    std::string tag, line;
    is >> tag >> gens_since_improvement_;
    if (tag != "cmame") throw io::CorruptSnapshot("bad cmame state header");
    is.ignore();
    emitter_.load([&]() {
      if (!std::getline(is, line))
        throw io::CorruptSnapshot("truncated emitter state");
      return io::parse_double(line);
    });
    size_t qn = 0;
    is >> tag >> qn;
    if (tag != "queue") throw io::CorruptSnapshot("bad queue header");
    is.ignore();
    queue_.clear();
    for (size_t i = 0; i < qn; ++i) queue_.push_back(io::read_genome(is));
    size_t bn = 0;
    is >> tag >> bn;
    if (tag != "batches") throw io::CorruptSnapshot("bad batches header");
    is.ignore();
    batches_.clear();
    for (size_t i = 0; i < bn; ++i) {
      size_t members = 0;
      Batch b;
      is >> tag >> members >> b.received;
      if (tag != "batch") throw io::CorruptSnapshot("bad batch header");
      is.ignore();
      for (size_t m = 0; m < members; ++m) {
        std::uint64_t id;
        int present, cls;
        std::string key;
        is >> id >> present >> cls >> key;
        is.ignore();
        b.ids.push_back(id);
        if (present)
          b.outcomes.push_back(Outcome{cls, io::parse_double(key)});
        else
          b.outcomes.push_back(std::nullopt);
        std::vector<double> y(param_count_);
        for (auto& v : y) {
          if (!std::getline(is, line))
            throw io::CorruptSnapshot("truncated batch y-vector");
          v = io::parse_double(line);
        }
        b.ys.push_back(std::move(y));
      }
      batches_.push_back(std::move(b));
    }
  }

 private:
  struct Outcome {
    int cls = 0;    // 2 new cell, 1 replacement, 0 rejected
    double key = 0; // score or score delta, class-dependent
  };

  struct Batch {
    std::vector<std::uint64_t> ids;
    std::vector<std::vector<double>> ys;
    std::vector<std::optional<Outcome>> outcomes;
    int received = 0;
  };

  void sample_batch(Rng& rng, IdSource& ids) {
    auto xs = emitter_.sample(rng);
    Batch b;
    for (auto& x : xs) {
      policy::Genome g;
      g.id = ids.next();
      std::vector<double> y(param_count_);
      for (size_t j = 0; j < param_count_; ++j)
        y[j] = (x[j] - emitter_.mean()[j]) / emitter_.sigma();
      b.ids.push_back(g.id);
      b.ys.push_back(std::move(y));
      b.outcomes.push_back(std::nullopt);
      g.params = std::move(x);
      queue_.push_back(std::move(g));
    }
    batches_.push_back(std::move(b));
  }

  void finish_batch(const Batch& b, Rng& rng, IdSource& ids) {
    std::vector<int> order(b.ids.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int l, int r) {
      const Outcome& a = *b.outcomes[l];
      const Outcome& z = *b.outcomes[r];
      if (a.cls != z.cls) return a.cls > z.cls;
      return a.key > z.key;
    });
    std::vector<std::vector<double>> ranked(order.size());
    bool any_accept = false;
    for (size_t i = 0; i < order.size(); ++i) {
      ranked[i] = b.ys[order[i]];
      if (b.outcomes[order[i]]->cls > 0) any_accept = true;
    }
    emitter_.update_ys(ranked);
    gens_since_improvement_ = any_accept ? 0 : gens_since_improvement_ + 1;
    if (gens_since_improvement_ >= cfg_.restart_threshold)
      force_restart(rng, ids);
  }

  void force_restart(Rng& rng, IdSource& ids) {
    std::vector<double> mean;
    if (map_.empty()) {
      auto g = policy::init_genome(rng, param_count_, cfg_.init_std, ids);
      mean = std::move(g.params);
    } else {
      mean = store_.get(map_.select_random(rng).genome_id).params;
    }
    emitter_.reinitialize(std::move(mean), cfg_.sigma0, !cfg_.full_covariance,
                          cfg_.lambda);
    gens_since_improvement_ = 0;
    queue_.clear();
    batches_.clear();
  }

  archive::EliteMap map_;
  archive::GenomeStore store_;
  CmaMeConfig cfg_;
  size_t param_count_;
  std::uint64_t topology_hash_;
  CmaEs emitter_;
  int gens_since_improvement_ = 0;
  std::deque<policy::Genome> queue_;
  std::deque<Batch> batches_;
};

}  // namespace qd::algorithms

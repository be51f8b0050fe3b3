#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>

#include "qd/policy/genome.hpp"

namespace qd::archive {

// Id-keyed side store for elite genomes. Maps hold genome ids only, so the
// same genome referenced from several maps (or cells) is stored once.
// Reference counts let replaced elites be dropped promptly.
class GenomeStore {
 public:
  void retain(const policy::Genome& g) {
    auto it = store_.find(g.id);
    if (it == store_.end())
      store_.emplace(g.id, Slot{g, 1});
    else
      it->second.refs += 1;
  }

  void release(std::uint64_t id) {
    auto it = store_.find(id);
    if (it == store_.end()) return;
    if (--it->second.refs == 0) store_.erase(it);
  }

  const policy::Genome& get(std::uint64_t id) const {
    auto it = store_.find(id);
    if (it == store_.end())
      throw std::out_of_range("genome id not in store: " + std::to_string(id));
    return it->second.genome;
  }

  bool contains(std::uint64_t id) const { return store_.count(id) != 0; }
  size_t size() const { return store_.size(); }

  int refs(std::uint64_t id) const {
    auto it = store_.find(id);
    return it == store_.end() ? 0 : it->second.refs;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [id, slot] : store_) fn(slot.genome, slot.refs);
  }

 private:
  struct Slot {
    policy::Genome genome;
    int refs = 0;
  };
  std::map<std::uint64_t, Slot> store_;
};

}  // namespace qd::archive

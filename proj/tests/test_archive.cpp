#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <sstream>

#include "qd/archive/elite_map.hpp"
#include "qd/archive/feature.hpp"
#include "qd/archive/genome_store.hpp"
#include "qd/io/snapshot.hpp"
#include "test_helpers.hpp"

using namespace qd;
using namespace qd::archive;

namespace {

env::EpisodeResult ep(bool won, bool key, double score = 0, int steps = 0) {
  env::EpisodeResult r;
  r.won = won;
  r.got_key = key;
  r.score = score;
  r.steps_used = steps;
  r.tiles_visited = 1;
  return r;
}

std::vector<env::EpisodeResult> losses(int n) {
  return std::vector<env::EpisodeResult>(n, ep(false, false));
}

}  // namespace

TEST_CASE("feature encoding matches the win-bitmask notation") {
  FeatureScheme win10{Scheme::Win, 10};
  auto results = losses(10);
  results[0] = ep(true, true);  // wins on levels 1 and 3 (1-indexed)
  results[2] = ep(true, true);
  auto f = feature_from_results(results, win10);
  CHECK(f.bits == 5);
  CHECK(feature_to_string(f) == "1-0-1-0-0-0-0-0-0-0");
  CHECK(f.wins() == 2);

  auto zero = feature_from_results(losses(10), win10);
  CHECK(zero.bits == 0);
  CHECK(feature_to_string(zero) == "0-0-0-0-0-0-0-0-0-0");
  CHECK(feature_to_string(BehaviorFeature{win10, 1023}) ==
        "1-1-1-1-1-1-1-1-1-1");
}

TEST_CASE("key-augmented scheme uses two bits per level") {
  FeatureScheme kw{Scheme::KeyWin, 10};
  CHECK(kw.cell_count() == 1048576);

  auto results = losses(10);
  results[1] = ep(false, true);  // key but no win on level 2
  auto f = feature_from_results(results, kw);
  CHECK(f.bits == 4);
  CHECK(feature_to_string(f) == "0-k-0-0-0-0-0-0-0-0");

  results[1] = ep(true, true);
  f = feature_from_results(results, kw);
  CHECK(f.bits == 12);
  CHECK(feature_to_string(f) == "0-kw-0-0-0-0-0-0-0-0");
  CHECK(f.wins() == 1);

  auto zero = feature_from_results(losses(10), kw);
  CHECK(zero.bits == 0);

  CHECK_THROWS_AS(feature_from_results(losses(9), kw), SchemeMismatch);
}

TEST_CASE("property: feature string round-trips") {
  Rng rng(3);
  FeatureScheme win{Scheme::Win, 10};
  FeatureScheme kw{Scheme::KeyWin, 10};
  for (int i = 0; i < 500; ++i) {
    BehaviorFeature f{win, uniform_index(rng, win.cell_count())};
    CHECK(feature_from_string(feature_to_string(f), win) == f);

    // keywin features respect win => key
    std::uint64_t bits = 0;
    for (int lvl = 0; lvl < 10; ++lvl) {
      auto v = uniform_index(rng, 3);  // 0, key, key+win
      if (v >= 1) bits |= 1ull << (2 * lvl);
      if (v == 2) bits |= 1ull << (2 * lvl + 1);
    }
    BehaviorFeature g{kw, bits};
    CHECK(feature_from_string(feature_to_string(g), kw) == g);
  }
}

TEST_CASE("try_insert criteria are strict") {
  FeatureScheme win{Scheme::Win, 10};
  BehaviorFeature f{win, 5};

  EliteMap max_map(win, Criterion::MaxScore);
  CHECK(max_map.try_insert(f, {1, 10.0, 100, 1}));
  CHECK_FALSE(max_map.try_insert(f, {2, 10.0, 50, 2}));  // tie keeps incumbent
  CHECK(max_map.find(f)->genome_id == 1);
  CHECK(max_map.try_insert(f, {3, 11.0, 100, 3}));

  EliteMap min_map(win, Criterion::MinTimesteps);
  CHECK(min_map.try_insert(f, {1, 0.0, 30000, 1}));
  CHECK(min_map.try_insert(f, {2, 0.0, 16461, 2}));
  CHECK_FALSE(min_map.try_insert(f, {3, 0.0, 16461, 3}));
  CHECK(min_map.find(f)->timesteps == 16461);

  FeatureScheme kw{Scheme::KeyWin, 10};
  CHECK_THROWS_AS(max_map.try_insert(BehaviorFeature{kw, 0}, {4, 1.0, 1, 4}),
                  SchemeMismatch);
}

TEST_CASE("property: map equals brute-force per-feature oracle") {
  FeatureScheme win{Scheme::Win, 10};
  Rng rng(2024);
  for (auto criterion : {Criterion::MaxScore, Criterion::MinTimesteps}) {
    EliteMap map(win, criterion);
    // oracle: first-arrival-wins scan keeping per-feature best
    std::map<std::uint64_t, EliteEntry> oracle;
    for (int i = 0; i < 1000; ++i) {
      BehaviorFeature f{win, uniform_index(rng, 64)};  // force collisions
      EliteEntry e{static_cast<std::uint64_t>(i + 1),
                   static_cast<double>(uniform_index(rng, 20)),
                   static_cast<std::int64_t>(uniform_index(rng, 20)),
                   static_cast<std::uint64_t>(i + 1)};
      map.try_insert(f, e);
      auto it = oracle.find(f.bits);
      if (it == oracle.end()) {
        oracle.emplace(f.bits, e);
      } else if (criterion == Criterion::MaxScore
                     ? e.score > it->second.score
                     : e.timesteps < it->second.timesteps) {
        it->second = e;
      }
    }
    REQUIRE(map.size() == oracle.size());
    for (const auto& [bits, expected] : oracle) {
      const auto* got = map.find(BehaviorFeature{win, bits});
      REQUIRE(got != nullptr);
      CHECK(got->genome_id == expected.genome_id);
      CHECK(got->score == expected.score);
      CHECK(got->timesteps == expected.timesteps);
    }
  }
}

TEST_CASE("select_random_elite is uniform over occupied cells") {
  FeatureScheme win{Scheme::Win, 10};
  EliteMap map(win, Criterion::MaxScore);
  Rng rng(8);
  CHECK_THROWS_AS(map.select_random(rng), EmptyMap);

  map.try_insert(BehaviorFeature{win, 1}, {1, 1.0, 1, 1});
  CHECK(map.select_random(rng).genome_id == 1);

  map.try_insert(BehaviorFeature{win, 2}, {2, 1.0, 1, 2});
  int first = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i)
    if (map.select_random(rng).genome_id == 1) ++first;
  double frac = static_cast<double>(first) / draws;
  CHECK(frac >= 0.48);
  CHECK(frac <= 0.52);
}

TEST_CASE("map_stats aggregates and empty-map sentinels") {
  FeatureScheme win{Scheme::Win, 10};
  EliteMap map(win, Criterion::MaxScore);
  auto s = map.stats();
  CHECK(s.occupied_cells == 0);
  CHECK(s.most_levels_solved == 0);
  CHECK(s.best_score == -std::numeric_limits<double>::infinity());
  CHECK(s.min_total_timesteps == std::numeric_limits<std::int64_t>::max());

  map.try_insert(BehaviorFeature{win, 5}, {1, 3.0, 40, 1});  // 2 wins
  s = map.stats();
  CHECK(s.most_levels_solved == 2);

  map.try_insert(BehaviorFeature{win, 0b0000000111}, {2, 1.0, 70, 2});
  map.try_insert(BehaviorFeature{win, 0b1111111000}, {3, 2.0, 90, 3});
  s = map.stats();
  CHECK(s.occupied_cells == 3);
  CHECK(s.most_levels_solved == 7);
  CHECK(s.best_score == 3.0);
  CHECK(s.min_total_timesteps == 40);
}

TEST_CASE("genome store reference counting") {
  GenomeStore store;
  policy::Genome g;
  g.id = 9;
  g.params = {1.0, 2.0};
  store.retain(g);
  store.retain(g);
  CHECK(store.size() == 1);
  CHECK(store.refs(9) == 2);
  store.release(9);
  CHECK(store.contains(9));
  store.release(9);
  CHECK_FALSE(store.contains(9));
  CHECK_THROWS_AS(store.get(9), std::out_of_range);
}

TEST_CASE("map and genome snapshots round-trip") {
  FeatureScheme kw{Scheme::KeyWin, 10};
  EliteMap map(kw, Criterion::MinTimesteps);
  map.try_insert(BehaviorFeature{kw, 12}, {5, 3.25, 400, 7});
  map.try_insert(BehaviorFeature{kw, 3}, {6, -1.5, 123, 9});

  GenomeStore store;
  Rng rng(4);
  IdSource ids(5);
  store.retain(policy::init_genome(rng, 20, 0.1, ids));
  auto child = policy::init_genome(rng, 20, 0.1, ids);
  child.parent_id = 5;
  store.retain(child);
  store.retain(child);

  std::stringstream ss;
  io::write_map(ss, map);
  io::write_store(ss, store, 0xabcd);

  auto map2 = io::read_map(ss);
  auto store2 = io::read_store(ss);
  CHECK(map2.size() == 2);
  CHECK(map2.criterion() == Criterion::MinTimesteps);
  CHECK(map2.find(BehaviorFeature{kw, 12})->score == 3.25);
  CHECK(map2.find(BehaviorFeature{kw, 3})->timesteps == 123);
  CHECK(store2.size() == 2);
  CHECK(store2.get(5).params == store.get(5).params);
  CHECK(store2.get(6).parent_id == 5);
  CHECK(store2.refs(6) == 2);

  std::stringstream truncated(ss.str().substr(0, 40));
  CHECK_THROWS_AS(io::read_map(truncated), io::CorruptSnapshot);
}

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "qd/algorithms/dme.hpp"
#include "qd/algorithms/efme.hpp"
#include "qd/algorithms/evaluate.hpp"
#include "qd/algorithms/vme.hpp"
#include "test_helpers.hpp"

using namespace qd;
using namespace qd::algorithms;

namespace {

archive::EvaluationResult fake_result(const archive::FeatureScheme& scheme,
                                      std::uint64_t bits, double score,
                                      std::int64_t steps) {
  archive::EvaluationResult r;
  r.feature = {scheme, bits};
  r.total_score = score;
  r.total_timesteps = steps;
  return r;
}

const archive::FeatureScheme kWin3{archive::Scheme::Win, 3};

}  // namespace

TEST_CASE("evaluate_candidate on a wall-bumping policy") {
  auto levels = qdtest::shipped_levels();
  env::EnvConfig cfg;
  policy::NetworkTopology topo;
  archive::FeatureScheme scheme{archive::Scheme::Win, 10};
  // all-zero genome: zero logits, argmax tie-break gives Up everywhere
  policy::Genome g;
  g.id = 1;
  g.params.assign(topo.param_count(), 0.0);

  auto r = evaluate_candidate(g, levels, cfg, topo, policy::ObsMode::OneHot,
                              scheme);
  REQUIRE(r.per_level.size() == 10);
  CHECK(r.feature.bits == 0);
  double score_sum = 0;
  std::int64_t steps_sum = 0;
  for (const auto& ep : r.per_level) {
    score_sum += ep.score;
    steps_sum += ep.steps_used;
  }
  CHECK(r.total_score == score_sum);
  CHECK(r.total_timesteps == steps_sum);

  auto r2 = evaluate_candidate(g, levels, cfg, topo, policy::ObsMode::OneHot,
                               scheme);
  CHECK(r == r2);
}

TEST_CASE("vme bootstraps from an empty map, then mutates elites") {
  VmeConfig cfg;
  VmeDriver d(kWin3, 10, cfg, 0);
  Rng rng(1);
  IdSource ids;

  auto g0 = d.propose(rng, ids);
  CHECK_FALSE(g0.parent_id.has_value());
  CHECK(g0.params.size() == 10);

  CHECK(d.apply(g0, fake_result(kWin3, 1, 5.0, 100), 1, rng, ids));
  auto g1 = d.propose(rng, ids);
  CHECK(g1.parent_id == g0.id);

  // change_prob=0 reproduces the elite under a fresh id
  VmeConfig noop;
  noop.change_prob = 0.0;
  VmeDriver d2(kWin3, 10, noop, 0);
  auto h0 = d2.propose(rng, ids);
  d2.apply(h0, fake_result(kWin3, 1, 5.0, 100), 1, rng, ids);
  auto h1 = d2.propose(rng, ids);
  CHECK(h1.params == h0.params);
  CHECK(h1.id != h0.id);
}

TEST_CASE("vme candidate stream is reproducible per seed") {
  auto run = [] {
    VmeDriver d(kWin3, 10, VmeConfig{}, 0);
    Rng rng(99);
    IdSource ids;
    std::vector<std::uint64_t> trace;
    for (int i = 1; i <= 100; ++i) {
      auto g = d.propose(rng, ids);
      trace.push_back(g.id);
      trace.push_back(g.parent_id.value_or(0));
      d.apply(g, fake_result(kWin3, uniform_index(rng, 8),
                             normal(rng), 100),
              i, rng, ids);
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("dme donor arithmetic") {
  CHECK(dme_donor({1, 2}, {3, 4}, {1, 1}, 0.5) ==
        std::vector<double>{2.0, 3.5});
  // b = c: the difference vanishes
  CHECK(dme_donor({1, 2}, {7, 7}, {7, 7}, 0.5) == std::vector<double>{1, 2});
  // F = 0: donor is a
  CHECK(dme_donor({1, 2}, {3, 4}, {0, 0}, 0.0) == std::vector<double>{1, 2});
}

TEST_CASE("dme proposal uses three distinct elites") {
  DmeConfig cfg;
  cfg.crossover_enabled = false;
  DmeDriver d(kWin3, 4, cfg, VmeConfig{}, 0);
  Rng rng(3);
  IdSource ids;

  // below 3 cells it behaves like vanilla
  auto g0 = d.propose(rng, ids);
  CHECK_FALSE(g0.parent_id.has_value());
  d.apply(g0, fake_result(kWin3, 0, 1.0, 10), 1, rng, ids);
  auto g1 = d.propose(rng, ids);
  CHECK(g1.parent_id == g0.id);
  d.apply(g1, fake_result(kWin3, 1, 1.0, 10), 2, rng, ids);
  auto g2 = d.propose(rng, ids);
  d.apply(g2, fake_result(kWin3, 2, 1.0, 10), 3, rng, ids);
  REQUIRE(d.primary_map().size() == 3);

  // with 3 occupied cells the proposal is a + F*(b - c) for distinct
  // elites; verify it equals the donor of some ordered elite triple
  auto child = d.propose(rng, ids);
  const auto& cells = d.primary_map().cells();
  std::vector<std::vector<double>> elites;
  for (const auto& [bits, e] : cells)
    elites.push_back(d.genomes().get(e.genome_id).params);
  bool matched = false;
  for (size_t a = 0; a < 3 && !matched; ++a)
    for (size_t b = 0; b < 3 && !matched; ++b)
      for (size_t c = 0; c < 3 && !matched; ++c) {
        if (a == b || b == c || a == c) continue;
        if (child.params == dme_donor(elites[a], elites[b], elites[c], cfg.F))
          matched = true;
      }
  CHECK(matched);
}

TEST_CASE("dme crossover rate 1 takes the donor everywhere") {
  DmeConfig cfg;
  cfg.CR = 1.0;
  DmeDriver with_cr(kWin3, 8, cfg, VmeConfig{}, 0);
  cfg.crossover_enabled = false;
  DmeDriver without(kWin3, 8, cfg, VmeConfig{}, 0);

  for (auto* d : {&with_cr, &without}) {
    Rng rng(17);
    IdSource ids;
    for (int i = 1; i <= 3; ++i) {
      auto g = d->propose(rng, ids);
      d->apply(g, fake_result(kWin3, i, 1.0, 10), i, rng, ids);
    }
  }
  // same seed: CR=1 crossover consumes per-dimension draws but must keep
  // donor values; both drivers hold identical elites, so proposals agree
  Rng r1(21), r2(21);
  IdSource i1(100), i2(100);
  auto a = with_cr.propose(r1, i1);
  auto b = without.propose(r2, i2);
  CHECK(a.params == b.params);
}

TEST_CASE("efme startup draws come from the explore map") {
  EfmeConfig cfg;
  cfg.startup = 100;
  cfg.explore_ratio = 0.0;  // after startup everything goes to follow
  EfmeDriver d(kWin3, 6, cfg, VmeConfig{}, 0);
  Rng rng(31);
  IdSource ids;

  // seed both maps with distinguishable elites
  auto g = d.propose(rng, ids);
  d.apply(g, fake_result(kWin3, 1, 10.0, 50), 1, rng, ids);
  CHECK(d.count_evaluated() == 1);

  for (std::uint64_t i = d.count_evaluated(); i < cfg.startup; ++i) {
    auto c = d.propose(rng, ids);
    d.apply(c, fake_result(kWin3, 1, 0.0, 1000), i + 1, rng, ids);
  }
  CHECK(d.explore_draws() == 0);  // none of those were post-startup

  for (int i = 0; i < 1000; ++i) (void)d.propose(rng, ids);
  CHECK(d.follow_draws() == 1000);
  CHECK(d.explore_draws() == 0);
}

TEST_CASE("efme gate ratio matches explore_ratio") {
  EfmeConfig cfg;
  cfg.startup = 0;
  cfg.explore_ratio = 0.67;
  EfmeDriver d(kWin3, 6, cfg, VmeConfig{}, 0);
  Rng rng(41);
  IdSource ids;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) (void)d.propose(rng, ids);
  double frac = static_cast<double>(d.explore_draws()) / draws;
  double tol = 4.0 * std::sqrt(0.67 * 0.33 / draws);
  CHECK(std::abs(frac - 0.67) <= tol);

  // boundary: ratio 1 always explores
  EfmeConfig one;
  one.startup = 0;
  one.explore_ratio = 1.0;
  EfmeDriver d1(kWin3, 6, one, VmeConfig{}, 0);
  for (int i = 0; i < 1000; ++i) (void)d1.propose(rng, ids);
  CHECK(d1.explore_draws() == 1000);
  CHECK(d1.follow_draws() == 0);
}

TEST_CASE("efme updates either or both maps") {
  EfmeDriver d(kWin3, 6, EfmeConfig{}, VmeConfig{}, 0);
  Rng rng(51);
  IdSource ids;

  auto g0 = d.propose(rng, ids);
  // empty maps: both accept
  CHECK(d.apply(g0, fake_result(kWin3, 1, 10.0, 100), 1, rng, ids));
  CHECK(d.explore_map().size() == 1);
  CHECK(d.follow_map().size() == 1);

  // higher score, more timesteps: explore accepts, follow rejects
  auto g1 = d.propose(rng, ids);
  d.apply(g1, fake_result(kWin3, 1, 20.0, 200), 2, rng, ids);
  CHECK(d.explore_map().find({kWin3, 1})->genome_id == g1.id);
  CHECK(d.follow_map().find({kWin3, 1})->genome_id == g0.id);

  // equal score, fewer timesteps: explore rejects (strict), follow accepts
  auto g2 = d.propose(rng, ids);
  d.apply(g2, fake_result(kWin3, 1, 20.0, 60), 3, rng, ids);
  CHECK(d.explore_map().find({kWin3, 1})->genome_id == g1.id);
  CHECK(d.follow_map().find({kWin3, 1})->genome_id == g2.id);
  CHECK(d.follow_map().find({kWin3, 1})->timesteps == 60);
}

TEST_CASE("lineage: every parent_id was an archive elite at proposal time") {
  VmeDriver d(kWin3, 10, VmeConfig{}, 0);
  Rng rng(61);
  IdSource ids;
  std::set<std::uint64_t> elite_history;
  for (int i = 1; i <= 300; ++i) {
    auto g = d.propose(rng, ids);
    if (g.parent_id) CHECK(elite_history.count(*g.parent_id) == 1);
    d.apply(g, fake_result(kWin3, uniform_index(rng, 8),
                           normal(rng), 100),
            i, rng, ids);
    for (const auto& [bits, e] : d.primary_map().cells())
      elite_history.insert(e.genome_id);
  }
}

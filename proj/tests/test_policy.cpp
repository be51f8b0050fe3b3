#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "qd/policy/genome.hpp"
#include "qd/policy/network.hpp"
#include "qd/policy/observation.hpp"
#include "test_helpers.hpp"

using namespace qd;
using namespace qd::policy;

TEST_CASE("default topology parameter count is near 7K") {
  NetworkTopology topo;
  CHECK(topo.param_count() >= 6500);
  CHECK(topo.param_count() <= 7500);
  CHECK(topo.param_count() == 7223);
  CHECK(NetworkTopology::dense_out == 5);
}

TEST_CASE("one-hot encoding marks exactly one channel per cell") {
  auto lvl = env::parse_level(qdtest::kCorridorLevel);
  auto s = env::reset(lvl);
  auto obs = encode(s, lvl, ObsMode::OneHot);
  REQUIRE(obs.channels == kEntityKinds);
  for (int r = 0; r < lvl.height; ++r) {
    for (int c = 0; c < lvl.width; ++c) {
      double sum = 0;
      for (int ch = 0; ch < obs.channels; ++ch) sum += obs.at(ch, r, c);
      CHECK(sum == 1.0);
    }
  }
  CHECK(obs.at(kChFloor, 1, 1) == 1.0);
  CHECK(obs.at(kChAvatar, 2, 1) == 1.0);
  CHECK(obs.at(kChKey, 2, 2) == 1.0);
  CHECK(obs.at(kChDoor, 2, 3) == 1.0);
  CHECK(obs.at(kChWall, 0, 0) == 1.0);
}

TEST_CASE("charmap encoding puts the avatar code over the floor code") {
  auto lvl = env::parse_level(qdtest::kCorridorLevel);
  auto s = env::reset(lvl);
  auto obs = encode(s, lvl, ObsMode::CharMap);
  REQUIRE(obs.channels == 1);
  double avatar_code = static_cast<double>(kChAvatar) / (kEntityKinds - 1);
  double floor_code = static_cast<double>(kChFloor) / (kEntityKinds - 1);
  CHECK(obs.at(0, 2, 1) == avatar_code);
  CHECK(obs.at(0, 1, 1) == floor_code);
  for (double v : obs.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("key pickup removes the key channel at the former key cell") {
  auto lvl = env::parse_level(qdtest::kCorridorLevel);
  env::EnvConfig cfg;
  auto s = env::reset(lvl);
  auto before = encode(s, lvl, ObsMode::OneHot);
  CHECK(before.at(kChKey, 2, 2) == 1.0);
  env::step(s, lvl, env::Action::Right, cfg);  // onto the key
  auto after = encode(s, lvl, ObsMode::OneHot);
  for (int r = 0; r < lvl.height; ++r)
    for (int c = 0; c < lvl.width; ++c)
      CHECK(after.at(kChKey, r, c) == 0.0);
  CHECK(after.at(kChAvatar, 2, 2) == 1.0);
}

TEST_CASE("one-hot encoding is lossless for entity positions") {
  auto lvl = env::parse_level(
      "wwwwww\nwA.+gw\nw3...w\nwwwwww\n");
  auto s = env::reset(lvl);
  auto obs = encode(s, lvl, ObsMode::OneHot);
  for (int r = 0; r < lvl.height; ++r) {
    for (int c = 0; c < lvl.width; ++c) {
      int argmax = 0;
      for (int ch = 1; ch < obs.channels; ++ch)
        if (obs.at(ch, r, c) > obs.at(argmax, r, c)) argmax = ch;
      int expected;
      if (s.avatar_pos == env::Cell{r, c}) expected = kChAvatar;
      else if (lvl.at(r, c) == env::Tile::MonsterStart) expected = kChMonster;
      else if (lvl.at(r, c) == env::Tile::Wall) expected = kChWall;
      else if (lvl.at(r, c) == env::Tile::Key) expected = kChKey;
      else if (lvl.at(r, c) == env::Tile::Door) expected = kChDoor;
      else expected = kChFloor;
      CHECK(argmax == expected);
    }
  }
}

TEST_CASE("all-zero genome yields all-zero logits") {
  auto lvl = env::parse_level(qdtest::kCorridorLevel);
  auto s = env::reset(lvl);
  auto obs = encode(s, lvl, ObsMode::OneHot);
  NetworkTopology topo;
  std::vector<double> zeros(topo.param_count(), 0.0);
  auto logits = forward(zeros, topo, obs);
  REQUIRE(logits.size() == 5);
  for (double v : logits) CHECK(v == 0.0);
}

TEST_CASE("forward is deterministic and shape-checked") {
  auto lvl = env::parse_level(qdtest::kCorridorLevel);
  auto s = env::reset(lvl);
  auto obs = encode(s, lvl, ObsMode::OneHot);
  NetworkTopology topo;
  Rng rng(1);
  IdSource ids;
  auto g = init_genome(rng, topo.param_count(), 0.1, ids);
  CHECK(forward(g.params, topo, obs) == forward(g.params, topo, obs));

  std::vector<double> wrong(topo.param_count() + 1, 0.0);
  CHECK_THROWS_AS(forward(wrong, topo, obs), ShapeMismatch);
  auto cm = encode(s, lvl, ObsMode::CharMap);
  CHECK_THROWS_AS(forward(g.params, topo, cm), ShapeMismatch);
}

TEST_CASE("hand-computed forward pass on a 1x1 topology") {
  // 1 input channel, 1x1 kernels, 1 filter, 1x1 pooling: every layer is a
  // scalar affine + relu, dense is a 5-vector affine.
  NetworkTopology topo;
  topo.input_channels = 1;
  topo.conv_filters = 1;
  topo.kernel = 1;
  topo.pool_h = topo.pool_w = 1;
  REQUIRE(topo.param_count() == 16);

  Observation obs;
  obs.mode = ObsMode::CharMap;
  obs.channels = 1;
  obs.height = obs.width = 1;
  obs.data = {0.5};

  // conv1: w=2,b=1 -> relu(2*0.5+1)=2; conv2: w=-1,b=0.5 -> relu(-1.5)=0;
  // conv3: w=3,b=0.25 -> relu(0.25)=0.25
  std::vector<double> params = {2, 1, -1, 0.5, 3, 0.25,
                                // dense weights (5x1), then biases
                                1, 2, -4, 0, 8, 0.1, 0.2, 0.3, 0.4, 0.5};
  auto logits = forward(params, topo, obs);
  std::vector<double> expected = {0.25 * 1 + 0.1, 0.25 * 2 + 0.2,
                                  0.25 * -4 + 0.3, 0.25 * 0 + 0.4,
                                  0.25 * 8 + 0.5};
  for (int i = 0; i < 5; ++i)
    CHECK(logits[i] == Catch::Approx(expected[i]).epsilon(1e-12));
}

TEST_CASE("select_action argmax and tie-break") {
  CHECK(select_action({0, 0, 0, 0, 1}) == env::Action::Use);
  CHECK(select_action({0, 0, 0, 0, 0}) == env::Action::Up);
  CHECK(select_action({2, 3, 3, 0, 0}) == env::Action::Down);
}

TEST_CASE("select_action is invariant under constant shifts") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(5);
    for (auto& v : logits) v = normal(rng);
    double shift = normal(rng, 0.0, 10.0);
    auto shifted = logits;
    for (auto& v : shifted) v += shift;
    CHECK(select_action(logits) == select_action(shifted));
  }
}

TEST_CASE("init_genome statistics and determinism") {
  Rng rng(42);
  IdSource ids;
  auto tiny = init_genome(rng, 50, 1e-13, ids);
  for (double p : tiny.params) CHECK(std::abs(p) < 1e-12);

  // empirical mean of N(0, std) samples within 4*std/sqrt(N) of zero
  const int n_genomes = 10000, len = 100;
  double sum = 0;
  for (int i = 0; i < n_genomes; ++i) {
    auto g = init_genome(rng, len, 0.1, ids);
    for (double p : g.params) sum += p;
  }
  double mean = sum / (n_genomes * len);
  CHECK(std::abs(mean) < 4.0 * 0.1 / std::sqrt(n_genomes * len));

  Rng a(7), b(7);
  IdSource ia, ib;
  CHECK(init_genome(a, 64, 0.1, ia).params ==
        init_genome(b, 64, 0.1, ib).params);
}

TEST_CASE("mutation with change_prob=0 copies the parent") {
  Rng rng(5);
  IdSource ids;
  auto parent = init_genome(rng, 100, 0.1, ids);
  auto child = mutate(parent, rng, 0.0, 0.03, ids);
  CHECK(child.params == parent.params);
  CHECK(child.parent_id == parent.id);
  CHECK(child.id != parent.id);
}

TEST_CASE("mutation statistics match change_prob and noise_std") {
  Rng rng(11);
  IdSource ids;
  const size_t len = 100000;
  auto parent = init_genome(rng, len, 0.1, ids);
  auto child = mutate(parent, rng, 0.7, 0.03, ids);
  REQUIRE(child.params.size() == len);

  size_t changed = 0;
  double sum = 0, sum2 = 0;
  for (size_t i = 0; i < len; ++i) {
    if (child.params[i] != parent.params[i]) {
      ++changed;
      double d = child.params[i] - parent.params[i];
      sum += d;
      sum2 += d * d;
    }
  }
  double frac = static_cast<double>(changed) / len;
  CHECK(frac >= 0.694);
  CHECK(frac <= 0.706);
  double var = sum2 / changed - (sum / changed) * (sum / changed);
  double sd = std::sqrt(var);
  CHECK(sd >= 0.0296);
  CHECK(sd <= 0.0304);
  for (double p : child.params) CHECK(std::isfinite(p));
}

TEST_CASE("replace-mode mutation draws fresh values") {
  Rng rng(13);
  IdSource ids;
  std::vector<double> big(1000, 100.0);
  Genome parent;
  parent.id = ids.next();
  parent.params = big;
  auto child = mutate(parent, rng, 1.0, 0.03, ids, MutationMode::Replace);
  for (double p : child.params) CHECK(std::abs(p) < 1.0);
}

#include <doctest.h>

#include <algorithm>
#include <set>

#include "velopref/grid_world.hpp"
#include "velopref/rng.hpp"
#include "oracles.hpp"

using namespace velopref;

namespace {

std::vector<std::vector<double>> uniform_features(int count, int dim,
                                                  double value = 0.5) {
  return std::vector<std::vector<double>>(count, std::vector<double>(dim, value));
}

std::set<Action> action_set(const World& w, int state) {
  const auto acts = w.local_actions(state);
  return {acts.begin(), acts.end()};
}

}  // namespace

TEST_CASE("1x1 world has only the stay action") {
  const World w = World::build(1, 1, {}, uniform_features(1, 3));
  CHECK(w.num_states() == 1);
  CHECK(action_set(w, 0) == std::set<Action>{Action::ST});
}

TEST_CASE("open 3x3: center has all 9 actions, corners have 4") {
  const World w = World::build(3, 3, {}, uniform_features(9, 2));
  const int center = w.state_of_cell(4);
  CHECK(w.local_actions(center).size() == 9);
  for (int corner_cell : {0, 2, 6, 8}) {
    CHECK(w.local_actions(w.state_of_cell(corner_cell)).size() == 4);
  }
}

TEST_CASE("3x3 with blocked center: (0,1) loses the action into it") {
  const World w = World::build(3, 3, {4}, uniform_features(8, 2));
  const int s = w.state_of_cell(1);  // row 0, col 1
  const auto acts = action_set(w, s);
  CHECK(!acts.count(Action::B));  // B points at the blocked center
  CHECK(acts.count(Action::ST));
  CHECK(acts.count(Action::L));
  CHECK(acts.count(Action::R));
  CHECK(acts.count(Action::BL));
  CHECK(acts.count(Action::BR));
  CHECK(acts.size() == 5);
}

TEST_CASE("top-left corner of an open grid: {ST, R, B, BR}") {
  const World w = World::build(3, 3, {}, uniform_features(9, 2));
  CHECK(action_set(w, w.state_of_cell(0)) ==
        std::set<Action>{Action::ST, Action::R, Action::B, Action::BR});
}

TEST_CASE("every passable state keeps ST") {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const World w = oracles::random_world(rng, 4, 4, 2);
    for (int s = 0; s < w.num_states(); ++s) {
      CHECK(action_set(w, s).count(Action::ST));
    }
  }
}

TEST_CASE("step follows the geometric offsets") {
  const World w = World::build(3, 3, {}, uniform_features(9, 2));
  const int c00 = w.state_of_cell(0);
  CHECK(w.step(c00, Action::ST) == c00);
  const int c11 = w.state_of_cell(4);
  CHECK(w.step(c11, Action::R) == w.state_of_cell(5));
  CHECK(w.step(c11, Action::F) == w.state_of_cell(1));
  CHECK_THROWS_AS(w.step(c00, Action::BL), Error);  // off-grid
}

TEST_CASE("action-geometry consistency: opposite move returns") {
  Rng rng(12);
  for (int i = 0; i < 20; ++i) {
    const World w = oracles::random_world(rng, 4, 4, 2);
    for (int s = 0; s < w.num_states(); ++s) {
      for (const Action a : w.local_actions(s)) {
        const int next = w.step(s, a);
        if (a == Action::ST) {
          CHECK(next == s);
          continue;
        }
        CHECK(next != s);
        const auto back = w.local_actions(next);
        if (std::find(back.begin(), back.end(), opposite(a)) != back.end()) {
          CHECK(w.step(next, opposite(a)) == s);
        }
      }
    }
  }
}

TEST_CASE("build_world rejects invalid input") {
  CHECK_THROWS_AS(World::build(2, 2, {0, 1, 2, 3}, {}), Error);  // no passable
  CHECK_THROWS_AS(World::build(1, 2, {}, {{0.5}, {0.5, 0.5}}), Error);
  CHECK_THROWS_AS(World::build(1, 1, {}, {{1.5}}), Error);  // outside [0,1]
  CHECK_THROWS_AS(World::build(1, 1, {}, {{-0.1}}), Error);
}

TEST_CASE("normalize_features maps columns to [0,1]") {
  const auto out = normalize_features({{2, 5, 0}, {4, 5, 1}, {6, 5, 0.5}});
  CHECK(out[0][0] == doctest::Approx(0.0));
  CHECK(out[1][0] == doctest::Approx(0.5));
  CHECK(out[2][0] == doctest::Approx(1.0));
  // constant column maps to 0
  CHECK(out[0][1] == 0.0);
  CHECK(out[1][1] == 0.0);
  // already normalized column is unchanged
  CHECK(out[0][2] == doctest::Approx(0.0));
  CHECK(out[1][2] == doctest::Approx(1.0));
  CHECK(out[2][2] == doctest::Approx(0.5));
}

TEST_CASE("normalize_features is idempotent") {
  Rng rng(13);
  std::vector<std::vector<double>> table(17, std::vector<double>(5));
  for (auto& row : table) {
    for (auto& v : row) v = rng.uniform(-40.0, 90.0);
  }
  const auto once = normalize_features(table);
  const auto twice = normalize_features(once);
  for (std::size_t i = 0; i < once.size(); ++i) {
    for (std::size_t k = 0; k < once[i].size(); ++k) {
      CHECK(twice[i][k] == doctest::Approx(once[i][k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalize_features rejects non-finite values") {
  CHECK_THROWS_AS(
      normalize_features({{1.0}, {std::numeric_limits<double>::quiet_NaN()}}),
      Error);
}

TEST_CASE("synthetic world is deterministic and connected") {
  SynthConfig cfg;
  cfg.rows = 10;
  cfg.cols = 12;
  cfg.blocked_fraction = 0.2;
  cfg.feature_dim = 4;
  cfg.seed = 77;
  const SyntheticWorld a = generate_synthetic_world(cfg);
  const SyntheticWorld b = generate_synthetic_world(cfg);
  CHECK(a.world.to_json() == b.world.to_json());
  CHECK(a.planted_rewards == b.planted_rewards);
  CHECK(a.world.connected());
}

TEST_CASE("zero planted weights give constant-zero rewards") {
  SynthConfig cfg;
  cfg.rows = 4;
  cfg.cols = 4;
  cfg.blocked_fraction = 0.0;
  cfg.feature_dim = 3;
  cfg.planted_weights = {0.0, 0.0, 0.0};
  cfg.seed = 5;
  const SyntheticWorld sw = generate_synthetic_world(cfg);
  for (double r : sw.planted_rewards) CHECK(r == 0.0);
}

TEST_CASE("one-hot planted weights rank states by that feature") {
  SynthConfig cfg;
  cfg.rows = 5;
  cfg.cols = 5;
  cfg.blocked_fraction = 0.1;
  cfg.feature_dim = 4;
  cfg.planted_weights = {0.0, 0.0, 1.0, 0.0};
  cfg.seed = 9;
  const SyntheticWorld sw = generate_synthetic_world(cfg);
  std::vector<int> by_reward(sw.world.num_states());
  std::vector<int> by_feature(sw.world.num_states());
  std::iota(by_reward.begin(), by_reward.end(), 0);
  by_feature = by_reward;
  std::sort(by_reward.begin(), by_reward.end(), [&](int a, int b) {
    return sw.planted_rewards[a] < sw.planted_rewards[b];
  });
  std::sort(by_feature.begin(), by_feature.end(), [&](int a, int b) {
    return sw.world.state_features(a)[2] < sw.world.state_features(b)[2];
  });
  CHECK(by_reward == by_feature);
}

TEST_CASE("planted rewards are min-max normalized") {
  SynthConfig cfg;
  cfg.rows = 6;
  cfg.cols = 6;
  cfg.feature_dim = 5;
  cfg.seed = 21;
  const SyntheticWorld sw = generate_synthetic_world(cfg);
  const auto [lo, hi] = std::minmax_element(sw.planted_rewards.begin(),
                                            sw.planted_rewards.end());
  CHECK(*lo == doctest::Approx(0.0));
  CHECK(*hi == doctest::Approx(1.0));
}

TEST_CASE("world JSON round-trips") {
  SynthConfig cfg;
  cfg.rows = 5;
  cfg.cols = 7;
  cfg.blocked_fraction = 0.25;
  cfg.feature_dim = 3;
  cfg.seed = 31;
  const World w = generate_synthetic_world(cfg).world;
  const World back = World::from_json(w.to_json());
  CHECK(back.to_json() == w.to_json());
  CHECK(back.rows() == w.rows());
  CHECK(back.blocked_cells() == w.blocked_cells());
}

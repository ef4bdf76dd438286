#pragma once

// Brute-force reference implementations used only by tests. Each one
// recomputes a quantity the library derives with dynamic programming or
// closed forms, by direct enumeration, so the two paths are independent.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <vector>

#include "velopref/shapley.hpp"

#include "velopref/grid_world.hpp"
#include "velopref/map_match.hpp"
#include "velopref/rng.hpp"
#include "velopref/solver.hpp"

namespace velopref::oracles {

struct EnumeratedPath {
  std::vector<int> states;   // decision states, origin first (goal excluded)
  std::vector<Action> actions;
  double cumulative_reward = 0.0;
};

// All first-hit goal-reaching action paths from `origin` with at most
// max_steps actions. Cumulative reward sums the decision states' rewards.
inline std::vector<EnumeratedPath> enumerate_goal_paths(
    const World& world, const std::vector<double>& rewards, int origin,
    int goal, int max_steps) {
  std::vector<EnumeratedPath> out;
  EnumeratedPath cur;
  std::function<void(int)> walk = [&](int state) {
    if (state == goal) {
      out.push_back(cur);
      return;
    }
    if (static_cast<int>(cur.actions.size()) >= max_steps) return;
    for (const Action a : world.local_actions(state)) {
      const int next = world.step(state, a);
      cur.states.push_back(state);
      cur.actions.push_back(a);
      cur.cumulative_reward += rewards[state];
      walk(next);
      cur.states.pop_back();
      cur.actions.pop_back();
      cur.cumulative_reward -= rewards[state];
    }
  };
  walk(origin);
  return out;
}

// MaxEnt probabilities over the enumerated paths: exp(sum reward) / Z with
// Z the sum over the enumerated set.
inline std::vector<double> maxent_path_probs(
    const std::vector<EnumeratedPath>& paths) {
  double z = 0.0;
  std::vector<double> probs(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    probs[i] = std::exp(paths[i].cumulative_reward);
    z += probs[i];
  }
  for (double& p : probs) p /= z;
  return probs;
}

// Probability of one action path under a solved policy.
inline double policy_path_prob(const SoftSolution& sol,
                               const EnumeratedPath& path) {
  double p = 1.0;
  for (std::size_t t = 0; t < path.actions.size(); ++t) {
    p *= sol.policy_at(path.states[t], path.actions[t]);
  }
  return p;
}

// Expected decision-state visits by exhaustive weighted rollout of the
// policy over exactly `horizon` epochs (the forward-DP oracle). Also
// accumulates the absorbed mass.
inline void enumerate_expected_visits(const World& world,
                                      const SoftSolution& sol, int state,
                                      double weight, int t, int horizon,
                                      std::vector<double>& visits,
                                      double& absorbed) {
  if (t == horizon) {
    if (state == sol.goal) absorbed += weight;
    return;
  }
  if (state != sol.goal) visits[state] += weight;
  for (int a = 0; a < kNumActions; ++a) {
    const double p = sol.policy_at(state, static_cast<Action>(a));
    if (p <= 0.0) continue;
    enumerate_expected_visits(world, sol, world.step(state, static_cast<Action>(a)),
                              weight * p, t + 1, horizon, visits, absorbed);
  }
}

// Exhaustive Viterbi: scores every adjacency-consistent candidate sequence
// with the library's own scorer and keeps the strictly best, visiting
// sequences in lexicographic candidate order (ties keep the first).
struct BruteViterbiResult {
  std::vector<int> cells;
  double score = -std::numeric_limits<double>::infinity();
  int optima = 0;  // sequences within 1e-9 of the best score
};

inline BruteViterbiResult brute_viterbi(const std::vector<GpsPoint>& points,
                                        const World& world,
                                        const MatchConfig& cfg) {
  std::vector<std::vector<int>> candidates(points.size());
  for (std::size_t t = 0; t < points.size(); ++t) {
    candidates[t] = match_candidates(points[t], world, cfg);
  }
  BruteViterbiResult best;
  std::vector<int> cur(points.size());
  std::function<void(std::size_t)> walk = [&](std::size_t t) {
    if (t == points.size()) {
      const double score = match_sequence_score(points, cur, world, cfg);
      if (score > best.score + 1e-9) {
        best.score = score;
        best.cells = cur;
        best.optima = 1;
      } else if (score > best.score - 1e-9) {
        ++best.optima;
        if (score > best.score) {
          best.score = score;  // keep the first sequence, refine the score
        }
      }
      return;
    }
    for (int cell : candidates[t]) {
      if (t > 0) {
        const int prev = cur[t - 1];
        if (cell != prev) {
          const int dr = cell / world.cols() - prev / world.cols();
          const int dc = cell % world.cols() - prev % world.cols();
          const auto a = action_from_offset(dr, dc);
          if (!a) continue;
          const int ps = world.state_of_cell(prev);
          if (ps < 0 || world.next_state(ps, *a) < 0) continue;
        }
      }
      cur[t] = cell;
      walk(t + 1);
    }
  };
  if (std::any_of(candidates.begin(), candidates.end(),
                  [](const auto& c) { return c.empty(); })) {
    return best;
  }
  walk(0);
  return best;
}

// Minimum geometric length over all simple paths (diagonals sqrt(2)).
inline double brute_shortest_length(const World& world, int origin, int goal) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> used(world.num_states(), 0);
  std::function<void(int, double)> walk = [&](int state, double length) {
    if (length >= best) return;
    if (state == goal) {
      best = length;
      return;
    }
    used[state] = 1;
    for (const Action a : world.local_actions(state)) {
      if (a == Action::ST) continue;
      const int next = world.step(state, a);
      if (used[next]) continue;
      const bool diagonal = kActionOffset[static_cast<int>(a)][0] != 0 &&
                            kActionOffset[static_cast<int>(a)][1] != 0;
      walk(next, length + world.cell_size() *
                              (diagonal ? std::numbers::sqrt2 : 1.0));
    }
    used[state] = 0;
  };
  walk(origin, 0.0);
  return best;
}

// Central finite difference of f along coordinate i.
inline double central_difference(const std::function<double()>& f, double* xi,
                                 double eps) {
  const double saved = *xi;
  *xi = saved + eps;
  const double hi = f();
  *xi = saved - eps;
  const double lo = f();
  *xi = saved;
  return (hi - lo) / (2.0 * eps);
}

// Shapley values by averaging marginal contributions over every one of
// the n! orderings; an independent check of the coalition-weighted sum.
inline std::vector<double> shapley_by_permutations(const CoalitionGame& game) {
  std::vector<int> order(game.n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> total(game.n, 0.0);
  std::size_t count = 0;
  do {
    std::uint32_t mask = 0;
    double prev = game.value(0);
    for (int idx : order) {
      mask |= 1u << idx;
      const double cur = game.value(mask);
      total[idx] += cur - prev;
      prev = cur;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : total) v /= static_cast<double>(count);
  return total;
}

// Small random connected world for property tests.
inline World random_world(Rng& rng, int max_rows, int max_cols, int dim,
                          double blocked_prob = 0.2) {
  for (int attempt = 0; attempt < 500; ++attempt) {
    const int rows = 1 + static_cast<int>(rng.uniform_int(max_rows));
    const int cols = 1 + static_cast<int>(rng.uniform_int(max_cols));
    std::vector<int> blocked;
    for (int cell = 0; cell < rows * cols; ++cell) {
      if (rng.uniform() < blocked_prob) blocked.push_back(cell);
    }
    if (static_cast<int>(blocked.size()) == rows * cols) continue;
    const int n = rows * cols - static_cast<int>(blocked.size());
    std::vector<std::vector<double>> features(n, std::vector<double>(dim));
    for (auto& row : features) {
      for (auto& v : row) v = rng.uniform();
    }
    World w = World::build(rows, cols, blocked, features);
    if (w.connected()) return w;
  }
  throw Error("random_world: no connected world found");
}

}  // namespace velopref::oracles

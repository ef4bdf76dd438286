#include "velopref/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <set>

#include "velopref/rng.hpp"

namespace velopref {

namespace {

Action sample_action(const SoftSolution& sol, int state, Rng& rng) {
  const double* row =
      sol.policy.data() + static_cast<std::size_t>(state) * kNumActions;
  const double u = rng.uniform();
  double cum = 0.0;
  int last_valid = -1;
  for (int a = 0; a < kNumActions; ++a) {
    if (row[a] <= 0.0) continue;
    last_valid = a;
    cum += row[a];
    if (u < cum) return static_cast<Action>(a);
  }
  // Rounding pushed the cumulative sum fractionally below 1.
  return static_cast<Action>(last_valid);
}

Action greedy_action(const SoftSolution& sol, int state) {
  const double* qrow =
      sol.Q.data() + static_cast<std::size_t>(state) * kNumActions;
  int best = -1;
  for (int a = 0; a < kNumActions; ++a) {
    if (qrow[a] == -std::numeric_limits<double>::infinity()) continue;
    if (best < 0 || qrow[a] > qrow[best]) best = a;
  }
  return static_cast<Action>(best);
}

}  // namespace

Trajectory rollout(const World& world, const SoftSolution& solution, int origin,
                   const RolloutConfig& config) {
  if (origin < 0 || origin >= world.num_states()) throw Error("origin out of bounds");
  if (config.max_steps < 1) throw Error("max_steps must be >= 1");

  Trajectory traj;
  traj.origin = origin;
  traj.destination = origin;
  if (origin == solution.goal) {
    traj.terminated = false;  // degenerate request, flagged for the caller
    traj.segment_count = 1;
    return traj;
  }

  Rng rng(config.seed);
  std::set<int> distinct{world.cell_of_state(origin)};
  int state = origin;
  traj.terminated = false;
  for (int t = 0; t < config.max_steps; ++t) {
    const Action a = config.mode == RolloutMode::stochastic
                         ? sample_action(solution, state, rng)
                         : greedy_action(solution, state);
    traj.steps.push_back({state, a});
    state = world.step(state, a);
    distinct.insert(world.cell_of_state(state));
    if (state == solution.goal) {
      traj.terminated = true;
      break;
    }
  }
  traj.destination = state;
  traj.segment_count = static_cast<int>(distinct.size());
  return traj;
}

Trajectory shortest_path(const World& world, int origin, int goal) {
  const int n = world.num_states();
  if (origin < 0 || origin >= n || goal < 0 || goal >= n) {
    throw Error("endpoint out of bounds");
  }
  const double kCardinal = world.cell_size();
  const double kDiagonal = world.cell_size() * std::numbers::sqrt2;

  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> parent(n, -1);
  std::vector<char> done(n, 0);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[origin] = 0.0;
  queue.push({0.0, origin});

  while (!queue.empty()) {
    const auto [d, s] = queue.top();
    queue.pop();
    if (done[s]) continue;
    done[s] = 1;
    if (s == goal) break;
    for (int a = 0; a < kNumActions; ++a) {
      if (static_cast<Action>(a) == Action::ST) continue;
      const int ns = world.next_state(s, static_cast<Action>(a));
      if (ns < 0 || done[ns]) continue;
      const bool diagonal =
          kActionOffset[a][0] != 0 && kActionOffset[a][1] != 0;
      const double alt = d + (diagonal ? kDiagonal : kCardinal);
      if (alt < dist[ns] ||
          (alt == dist[ns] && parent[ns] >= 0 &&
           world.cell_of_state(s) < world.cell_of_state(parent[ns]))) {
        dist[ns] = alt;
        parent[ns] = s;
        queue.push({alt, ns});
      }
    }
  }
  if (!done[goal] && origin != goal) {
    if (dist[goal] == std::numeric_limits<double>::infinity()) {
      throw Error("goal unreachable from origin");
    }
  }

  std::vector<int> cells;
  for (int s = goal; s != -1; s = parent[s]) cells.push_back(world.cell_of_state(s));
  std::reverse(cells.begin(), cells.end());
  if (cells.front() != world.cell_of_state(origin)) {
    throw Error("goal unreachable from origin");
  }
  return to_trajectory(cells, world);
}

}  // namespace velopref

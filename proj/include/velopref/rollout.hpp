#pragma once

#include <cstdint>

#include "velopref/solver.hpp"
#include "velopref/trajectory.hpp"

namespace velopref {

enum class RolloutMode { stochastic, greedy };

struct RolloutConfig {
  RolloutMode mode = RolloutMode::greedy;
  int max_steps = 1000;
  std::uint64_t seed = 1;
};

// Simulates one trip from `origin` under the solution's policy. Stochastic
// mode samples pi(.|s); greedy mode takes argmax_a Q(s,a), lowest action
// index on ties. Stops at the goal or after max_steps (then flagged
// non-terminated). origin == goal yields an empty, flagged trajectory.
Trajectory rollout(const World& world, const SoftSolution& solution, int origin,
                   const RolloutConfig& config);

// Minimal geometric-length path on the 8-connected grid: cardinal moves
// cost cell_size, diagonals cell_size * sqrt(2), ST excluded. Ties are
// broken toward the lexicographically smaller predecessor cell, so the
// result is deterministic. Throws when the goal is unreachable.
Trajectory shortest_path(const World& world, int origin, int goal);

}  // namespace velopref

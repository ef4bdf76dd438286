#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "velopref/grid_world.hpp"
#include "velopref/reward_model.hpp"
#include "velopref/trajectory.hpp"

namespace velopref {

struct ConvergenceError : Error {
  ConvergenceError(const std::string& msg, double residual_)
      : Error(msg), residual(residual_) {}
  double residual;
};

// Converged solution of one goal-conditioned soft MDP. V is the soft
// (logsumexp) value per state; policy rows are exp(Q - V) over the local
// actions. The goal is absorbing: its Q row is pinned to {ST: 0,
// others: -inf}, so V(goal) = 0 and the policy stays there.
struct SoftSolution {
  int goal = 0;
  double gamma = 0.99;
  std::vector<double> V;       // num_states
  std::vector<double> Q;       // num_states x kNumActions, -inf where invalid
  std::vector<double> policy;  // num_states x kNumActions, 0 where invalid
  int iterations = 0;
  double residual = 0.0;

  double policy_at(int state, Action a) const {
    return policy[static_cast<std::size_t>(state) * kNumActions +
                  static_cast<int>(a)];
  }
};

// State visitation frequencies. `visits` excludes the goal state (mass
// that has been absorbed stops being counted); `absorbed` is the total
// mass that reached the goal within the horizon, and `tail_mass` what was
// still traveling when the horizon ran out.
struct SVF {
  std::vector<double> visits;
  int horizon = 0;
  double absorbed = 0.0;
  double tail_mass = 0.0;
  // Total mass of D_t (goal included) per decision epoch; stays 1 for a
  // normalized origin distribution.
  std::vector<double> step_mass;
};

// Soft value iteration: fixed point of Q(s,a) = r(s) + gamma * V(next),
// V = logsumexp_a Q, with V(goal) = 0 held fixed. Stops when the sweep
// residual max|dV| drops below tol; throws ConvergenceError (carrying the
// residual) at `max_iters`. `warm_start` optionally seeds V with a
// previous solution's values. Sweeps are parallelized over states.
SoftSolution soft_value_iteration(const World& world,
                                  const std::vector<double>& rewards, int goal,
                                  double gamma, double tol = 1e-9,
                                  int max_iters = 200000,
                                  const std::vector<double>* warm_start = nullptr);

// Forward pass: D_0 = origin_dist, D_{t+1}(s') = sum_{s,a} D_t(s) pi(a|s)
// [step(s,a) = s'], goal absorbing. Accumulates sum of D_t over the
// `horizon` decision epochs into visits (goal excluded, see SVF).
SVF expected_svf(const World& world, const SoftSolution& solution,
                 const std::vector<double>& origin_dist, int horizon);

// Demonstrated SVF: per-state count of real (unmasked) step states across
// the batch, divided by the number of trajectories.
SVF expert_svf(const TrajectoryBatch& batch, const World& world);

// Ascent gradient of the MaxEnt likelihood plus Gaussian log-prior:
// sum_s (expert(s) - expected(s)) dR(x_s)/dtheta - lambda * theta.
GradientRecord maxent_gradient(const SVF& expert, const SVF& expected,
                               const RewardModel& model, const World& world,
                               double lambda);

struct LikelihoodStats {
  double log_likelihood = 0.0;
  std::size_t trips_used = 0;
  std::size_t trips_excluded = 0;  // contained a zero-probability action
};

// Goal-conditioned factorization: sum over trips and steps of
// log pi(a_t | s_t). Trips using an action the policy gives zero
// probability are excluded and counted.
LikelihoodStats log_likelihood(const std::vector<Trajectory>& trips,
                               const SoftSolution& solution);

struct TrainConfig {
  double gamma = 0.99;
  double vi_tol = 1e-9;
  int vi_max_iters = 200000;
  int horizon = 0;  // 0 -> 4 * (rows + cols)
  int epochs = 120;
  double learning_rate = 0.02;
  double lambda = 1e-4;
  int width = 64;
  int depth = 4;
  std::uint64_t seed = 1;
  // Monotone guard: a step whose log-likelihood drops more than dip_tol
  // is rolled back and retried at half the step scale.
  double dip_tol = 1e-7;
  int max_backtracks = 60;
};

struct EpochRecord {
  int epoch = 0;
  double log_likelihood = 0.0;
  double grad_norm = 0.0;
  double mean_residual = 0.0;
  double wall_time_ms = 0.0;
};

struct TrainResult {
  RewardModel model;
  std::vector<EpochRecord> history;
  std::size_t trips_excluded = 0;

  std::string history_csv() const;
};

// Trips grouped by destination state, in ascending goal order.
std::map<int, std::vector<int>> group_by_goal(const TrajectoryBatch& batch);

// MEDIRL training: per epoch, evaluate rewards for all states, solve one
// soft MDP per destination present in the batch (parallel over goals,
// warm-started across epochs), aggregate expected SVF seeded at each
// goal's trip origins, and ascend the likelihood-plus-prior gradient.
// Deterministic for a fixed config, including thread count.
TrainResult train(const World& world, const TrajectoryBatch& batch,
                  const TrainConfig& config);

int default_horizon(const World& world);

}  // namespace velopref

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "velopref/reward_model.hpp"
#include "velopref/trajectory.hpp"

namespace velopref {

// A coalition game over n players; `value` maps a player subset (bitmask)
// to a payoff. value(0) is the baseline.
struct CoalitionGame {
  int n = 0;
  std::function<double(std::uint32_t)> value;
};

enum class ShapleyMethod { exact, sampled };

struct ShapleyReport {
  std::vector<double> phi;
  ShapleyMethod method = ShapleyMethod::exact;
  std::size_t samples = 0;               // sampled only
  std::vector<double> stderr_phi;        // sampled only
  double baseline = 0.0;                 // value of the empty coalition
  double full_value = 0.0;               // value of the grand coalition
  int instance_id = -1;
};

inline constexpr int kExactShapleyMaxPlayers = 14;

// Exact Shapley values by full coalition enumeration with the factorial
// weights |S|! (n-|S|-1)! / n!. Guarded at n <= 14; larger games must use
// the sampled estimator.
ShapleyReport exact_shapley(const CoalitionGame& game);

// Permutation-sampling estimator: the average marginal contribution of
// each player over uniformly random orderings, with per-player standard
// errors. Deterministic under `seed`.
ShapleyReport sampled_shapley(const CoalitionGame& game, std::size_t samples,
                              std::uint64_t seed);

// Interventional value function for one reward-model evaluation: value(S)
// averages, over background rows, the reward of the instance with features
// outside S replaced by the background row's values.
CoalitionGame reward_game(const RewardModel& model,
                          const std::vector<double>& instance,
                          const std::vector<std::vector<double>>& background);

struct GlobalImportance {
  // phi_table[s * d + k] is feature k's attribution at state s.
  std::vector<double> phi_table;
  std::vector<double> stderr_table;  // zeros for exact rows
  ShapleyMethod method = ShapleyMethod::exact;
  int num_states = 0;
  int dim = 0;
  std::vector<double> mean_abs_phi;   // per feature
  std::vector<int> ranking;           // feature ids, descending mean |phi|

  std::string phi_csv(const World& world) const;
};

// Per-state attributions over all world states: exact when the feature
// count allows, otherwise permutation-sampled with `budget` permutations
// per state (derived per-state seeds keep parallel and serial runs equal).
GlobalImportance global_importance(const RewardModel& model, const World& world,
                                   const std::vector<std::vector<double>>& background,
                                   std::size_t budget, std::uint64_t seed);

// Background rows drawn uniformly from the world's states.
std::vector<std::vector<double>> sample_background(const World& world,
                                                   std::size_t count,
                                                   std::uint64_t seed);

// (x_j, phi_j) pairs for one feature, sorted by x_j; the dependence-plot
// data for that feature.
std::vector<std::pair<double, double>> dependence_data(
    const GlobalImportance& importance, const World& world, int feature);

std::string dependence_csv(const GlobalImportance& importance,
                           const World& world, int feature);

// One attribution per visited decision state of the trajectory.
std::vector<ShapleyReport> local_trip_attribution(
    const RewardModel& model, const Trajectory& trajectory, const World& world,
    const std::vector<std::vector<double>>& background, std::size_t budget,
    std::uint64_t seed);

// Aggregate mean |phi| by named feature group; `groups[k]` labels feature k.
std::string group_summary_json(const GlobalImportance& importance,
                               const std::vector<std::string>& groups);

}  // namespace velopref

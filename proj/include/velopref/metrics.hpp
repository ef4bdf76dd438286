#pragma once

#include <string>
#include <vector>

#include "velopref/trajectory.hpp"

namespace velopref {

// Probability vector over a shared support; entries nonnegative, sum 1.
struct Distribution {
  std::vector<double> p;

  static Distribution from_counts(const std::vector<double>& counts);
  void validate() const;  // throws unless nonnegative and sums to 1 (1e-9)
};

// sum_i p_i ln(p_i / q_i), with 0 ln(0/.) = 0. When `smoothing` is zero
// (default), a positive p_i over a zero q_i is an error; otherwise both
// distributions are blended with the uniform mass epsilon and renormalized.
double kl(const Distribution& p, const Distribution& q, double smoothing = 0.0);

// sqrt((KL(p||m) + KL(q||m)) / 2), m the even mixture; natural log, so the
// range is [0, sqrt(ln 2)]. This is the square-root (metric) form.
double jsd(const Distribution& p, const Distribution& q);

// Sorensen-Dice coefficient over the sets of distinct visited cells:
// 2 |C1 n C2| / (|C1| + |C2|), in [0, 1].
double cpc(const Trajectory& t1, const Trajectory& t2, const World& world);

// Frequency of occurrence of each state over the trips, normalized to 1.
Distribution svf_distribution(const std::vector<Trajectory>& trajs,
                              const World& world);

// Min-max normalizes rewards to [0,1] and returns population mean and
// variance; constant input yields (0, 0).
std::pair<double, double> reward_stats(const std::vector<double>& rewards);

struct PairedTrajectories {
  Trajectory real;
  Trajectory synthetic;
  Trajectory shortest;
};

struct CpcBin {
  int decisions = 0;  // real-trajectory segment count
  std::size_t count = 0;
  double mean_synthetic = 0.0;
  double mean_shortest = 0.0;
  double q1_synthetic = 0.0, median_synthetic = 0.0, q3_synthetic = 0.0;
  double q1_shortest = 0.0, median_shortest = 0.0, q3_shortest = 0.0;
};

// Unit-width bins over the real trajectory's segment count; per bin the
// mean and quartiles of CPC(real, synthetic) and CPC(real, shortest).
std::vector<CpcBin> cpc_by_decision_frequency(
    const std::vector<PairedTrajectories>& pairs, const World& world);

struct EvalReport {
  double jsd_synthetic = 0.0;  // JSD(real SVF dist, synthetic SVF dist)
  double jsd_shortest = 0.0;
  double mean_cpc_synthetic = 0.0;
  double mean_cpc_shortest = 0.0;
  std::size_t pairs_used = 0;
  std::size_t pairs_skipped = 0;  // non-terminated synthetic trajectories
  std::vector<CpcBin> cpc_by_decision_bin;
  double reward_mean = 0.0;
  double reward_variance = 0.0;

  std::string to_json() const;
  std::string cpc_rows_csv(const std::vector<PairedTrajectories>& pairs,
                           const World& world) const;
  static std::string svf_histogram_csv(const Distribution& real,
                                       const Distribution& synthetic,
                                       const Distribution& shortest);
};

// Full comparison over paired trajectories plus reward statistics.
// Pairs whose synthetic member is non-terminated are skipped for CPC
// (counted), and all members enter the SVF distributions.
EvalReport evaluate_pairs(const std::vector<PairedTrajectories>& pairs,
                          const std::vector<double>& state_rewards,
                          const World& world,
                          bool include_nonterminated_cpc = false);

}  // namespace velopref

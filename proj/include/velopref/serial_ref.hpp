#pragma once

#include <vector>

#include "velopref/reward_model.hpp"
#include "velopref/solver.hpp"

namespace velopref::serial {

// Straight-line single-threaded implementations of the parallel kernels.
// They are the comparison baseline: tests assert the OpenMP paths agree
// with these, and the benchmark tool times both.

SoftSolution soft_value_iteration(const World& world,
                                  const std::vector<double>& rewards, int goal,
                                  double gamma, double tol = 1e-9,
                                  int max_iters = 200000);

SVF expected_svf(const World& world, const SoftSolution& solution,
                 const std::vector<double>& origin_dist, int horizon);

std::vector<double> forward_batch(const RewardModel& model,
                                  const std::vector<double>& features, int n);

GradientRecord backward_batch(const RewardModel& model,
                              const std::vector<double>& features, int n,
                              const std::vector<double>& upstream);

}  // namespace velopref::serial

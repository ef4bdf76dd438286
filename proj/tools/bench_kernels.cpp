// Times the OpenMP kernels against their serial reference implementations
// on a larger world than the tests use. Build and run:
//   cmake --build build --target bench_kernels && ./build/tools/bench_kernels
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "velopref/grid_world.hpp"
#include "velopref/reward_model.hpp"
#include "velopref/serial_ref.hpp"
#include "velopref/solver.hpp"

using namespace velopref;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() /
         repeats;
}

void report(const std::string& name, double serial_ms, double parallel_ms) {
  std::printf("%-24s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx\n",
              name.c_str(), serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  const int side = argc > 1 ? std::atoi(argv[1]) : 60;
#ifdef _OPENMP
  std::printf("threads: %d, world %dx%d\n", omp_get_max_threads(), side, side);
#else
  std::printf("threads: 1 (no OpenMP), world %dx%d\n", side, side);
#endif

  SynthConfig synth;
  synth.rows = side;
  synth.cols = side;
  synth.blocked_fraction = 0.15;
  synth.feature_dim = 16;
  synth.seed = 7;
  const SyntheticWorld sw = generate_synthetic_world(synth);
  const World& world = sw.world;
  const int n = world.num_states();

  std::vector<double> rewards(n);
  for (int s = 0; s < n; ++s) rewards[s] = -4.0 + 1.5 * sw.planted_rewards[s];
  const int goal = n / 2;

  const double vi_serial = time_ms(
      [&] { serial::soft_value_iteration(world, rewards, goal, 0.99, 1e-9); }, 3);
  const double vi_parallel = time_ms(
      [&] { soft_value_iteration(world, rewards, goal, 0.99, 1e-9); }, 3);
  report("soft_value_iteration", vi_serial, vi_parallel);

  const SoftSolution sol = soft_value_iteration(world, rewards, goal, 0.99, 1e-9);
  const int horizon = default_horizon(world);
  std::vector<double> origin(n, 0.0);
  origin[0] = 1.0;
  const double svf_serial =
      time_ms([&] { serial::expected_svf(world, sol, origin, horizon); }, 5);
  const double svf_parallel =
      time_ms([&] { expected_svf(world, sol, origin, horizon); }, 5);
  report("expected_svf (1 origin)", svf_serial, svf_parallel);

  std::vector<double> spread(n, 1.0 / n);
  const double svf_serial_d =
      time_ms([&] { serial::expected_svf(world, sol, spread, horizon); }, 5);
  const double svf_parallel_d =
      time_ms([&] { expected_svf(world, sol, spread, horizon); }, 5);
  report("expected_svf (dense)", svf_serial_d, svf_parallel_d);

  const RewardModel model = RewardModel::init(3, world.feature_dim(), 64, 4);
  const double fwd_serial = time_ms(
      [&] { serial::forward_batch(model, world.feature_matrix(), n); }, 10);
  const double fwd_parallel =
      time_ms([&] { model.forward_batch(world.feature_matrix(), n); }, 10);
  report("reward forward_batch", fwd_serial, fwd_parallel);

  std::vector<double> upstream(n);
  for (int s = 0; s < n; ++s) upstream[s] = (s % 3 == 0 ? 1.0 : -0.5) / n;
  const double bwd_serial = time_ms(
      [&] { serial::backward_batch(model, world.feature_matrix(), n, upstream); },
      10);
  const double bwd_parallel = time_ms(
      [&] { model.backward_batch(world.feature_matrix(), n, upstream); }, 10);
  report("reward backward_batch", bwd_serial, bwd_parallel);

  return 0;
}

#include "velopref/solver.hpp"

#include "velopref/serial_ref.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace velopref {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// State counts below which the persistent parallel regions run single
// threaded; sweeps on small worlds are cheaper than the barriers.
constexpr int kParallelStatesVi = 2048;
constexpr int kParallelStatesSvf = 8192;

double logsumexp_row(const double* q, int n) {
  double hi = kNegInf;
  for (int i = 0; i < n; ++i) hi = std::max(hi, q[i]);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    if (q[i] != kNegInf) acc += std::exp(q[i] - hi);
  }
  return hi + std::log(acc);
}

}  // namespace

int default_horizon(const World& world) {
  return 4 * (world.rows() + world.cols());
}

SoftSolution soft_value_iteration(const World& world,
                                  const std::vector<double>& rewards, int goal,
                                  double gamma, double tol, int max_iters,
                                  const std::vector<double>* warm_start) {
  const int n = world.num_states();
  if (goal < 0 || goal >= n) throw Error("goal out of bounds");
  if (static_cast<int>(rewards.size()) != n) throw Error("rewards size mismatch");
  if (gamma <= 0.0 || gamma > 1.0) throw Error("gamma must lie in (0, 1]");
  for (double r : rewards) {
    if (!std::isfinite(r)) throw Error("non-finite reward");
  }

  SoftSolution sol;
  sol.goal = goal;
  sol.gamma = gamma;
  sol.V = warm_start && static_cast<int>(warm_start->size()) == n
              ? *warm_start
              : std::vector<double>(n, 0.0);
  sol.V[goal] = 0.0;
  std::vector<double> v_next(n, 0.0);

  // One parallel region for the whole solve, ping-pong buffers swapped by
  // parity under single. Threads hoist the buffer pointers per sweep so
  // the inner loop sees plain local pointers. Below kParallelStatesVi the
  // barrier cost outruns the sweep work and the region stays serial.
  double* bufs[2] = {sol.V.data(), v_next.data()};
  const double* rw = rewards.data();
  double residual = std::numeric_limits<double>::infinity();
  double sweep_residual = 0.0;
  int parity = 0;
  int iter = 0;
  bool done = max_iters == 0;
#pragma omp parallel default(shared) if (n >= kParallelStatesVi)
  {
    while (!done) {
      const double* vin = bufs[parity & 1];
      double* vout = bufs[(parity + 1) & 1];
#pragma omp for schedule(static) reduction(max : sweep_residual)
      for (int s = 0; s < n; ++s) {
        if (s == goal) {
          vout[s] = 0.0;
          continue;
        }
        double q[kNumActions];
        for (int a = 0; a < kNumActions; ++a) {
          const int ns = world.next_state(s, static_cast<Action>(a));
          q[a] = ns < 0 ? kNegInf : rw[s] + gamma * vin[ns];
        }
        const double v = logsumexp_row(q, kNumActions);
        sweep_residual = std::max(sweep_residual, std::abs(v - vin[s]));
        vout[s] = v;
      }
#pragma omp single
      {
        ++parity;
        residual = sweep_residual;
        sweep_residual = 0.0;
        ++iter;
        done = residual <= tol || iter >= max_iters || !std::isfinite(residual);
      }
    }
  }
  if (parity & 1) std::swap(sol.V, v_next);
  sol.iterations = iter;
  sol.residual = residual;
  if (residual > tol) {
    std::ostringstream msg;
    msg << "soft value iteration did not converge: residual " << residual
        << " after " << iter << " sweeps";
    throw ConvergenceError(msg.str(), residual);
  }

  sol.Q.assign(static_cast<std::size_t>(n) * kNumActions, kNegInf);
  sol.policy.assign(static_cast<std::size_t>(n) * kNumActions, 0.0);
#pragma omp parallel for schedule(static)
  for (int s = 0; s < n; ++s) {
    double* qrow = sol.Q.data() + static_cast<std::size_t>(s) * kNumActions;
    double* prow = sol.policy.data() + static_cast<std::size_t>(s) * kNumActions;
    if (s == goal) {
      qrow[static_cast<int>(Action::ST)] = 0.0;
      prow[static_cast<int>(Action::ST)] = 1.0;
      continue;
    }
    for (int a = 0; a < kNumActions; ++a) {
      const int ns = world.next_state(s, static_cast<Action>(a));
      if (ns >= 0) qrow[a] = rewards[s] + gamma * sol.V[ns];
    }
    const double v = logsumexp_row(qrow, kNumActions);
    double total = 0.0;
    for (int a = 0; a < kNumActions; ++a) {
      if (qrow[a] != kNegInf) {
        prow[a] = std::exp(qrow[a] - v);
        total += prow[a];
      }
    }
    // Renormalize away the logsumexp rounding so rows sum to 1 exactly.
    for (int a = 0; a < kNumActions; ++a) prow[a] /= total;
  }
  return sol;
}

SVF expected_svf(const World& world, const SoftSolution& solution,
                 const std::vector<double>& origin_dist, int horizon) {
  const int n = world.num_states();
  if (static_cast<int>(origin_dist.size()) != n) {
    throw Error("origin distribution size mismatch");
  }
  if (horizon < 1) throw Error("horizon must be >= 1");

  // Small problems go to the scatter loop, which skips empty states; the
  // dense gather below only pays off once rows are wide enough to split.
  if (n < kParallelStatesSvf) {
    return serial::expected_svf(world, solution, origin_dist, horizon);
  }

  // Incoming transitions per state (CSR layout) so each D_{t+1} entry is
  // a gather with a fixed summation order: deterministic for any thread
  // count, unlike a scatter with atomics.
  std::vector<int> in_offset(n + 1, 0);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      const int ns = world.next_state(s, static_cast<Action>(a));
      if (ns >= 0) ++in_offset[ns + 1];
    }
  }
  for (int s = 0; s < n; ++s) in_offset[s + 1] += in_offset[s];
  std::vector<int> in_src(in_offset[n]);
  std::vector<double> in_prob(in_offset[n]);
  {
    std::vector<int> cursor(in_offset.begin(), in_offset.end() - 1);
    for (int s = 0; s < n; ++s) {
      for (int a = 0; a < kNumActions; ++a) {
        const int ns = world.next_state(s, static_cast<Action>(a));
        if (ns < 0) continue;
        in_src[cursor[ns]] = s;
        in_prob[cursor[ns]] =
            solution.policy[static_cast<std::size_t>(s) * kNumActions + a];
        ++cursor[ns];
      }
    }
  }

  SVF svf;
  svf.horizon = horizon;
  svf.visits.assign(n, 0.0);
  svf.step_mass.assign(horizon, 0.0);
  std::vector<double> d = origin_dist;
  std::vector<double> d_next(n, 0.0);
  const int goal = solution.goal;

  double* bufs[2] = {d.data(), d_next.data()};
  double* visits = svf.visits.data();
  const int* offs = in_offset.data();
  const int* src = in_src.data();
  const double* prob = in_prob.data();
#pragma omp parallel default(shared)
  {
    for (int t = 0; t < horizon; ++t) {
      const double* din = bufs[t & 1];
      double* dout = bufs[(t + 1) & 1];
#pragma omp single
      {
        double mass = 0.0;
        for (int s = 0; s < n; ++s) mass += din[s];
        svf.step_mass[t] = mass;
      }
#pragma omp for schedule(static)
      for (int s = 0; s < n; ++s) {
        if (s != goal) visits[s] += din[s];
        double acc = 0.0;
        for (int e = offs[s]; e < offs[s + 1]; ++e) {
          acc += din[src[e]] * prob[e];
        }
        dout[s] = acc;
      }
    }
  }
  if (horizon & 1) std::swap(d, d_next);
  svf.absorbed = d[goal];
  for (int s = 0; s < n; ++s) {
    if (s != goal) svf.tail_mass += d[s];
  }
  return svf;
}

SVF expert_svf(const TrajectoryBatch& batch, const World& world) {
  const int n = world.num_states();
  SVF svf;
  svf.visits.assign(n, 0.0);
  for (int i = 0; i < batch.size(); ++i) {
    for (int t = 0; t < batch.max_len; ++t) {
      if (batch.masked(i, t)) continue;
      const int s = batch.padded_states[static_cast<std::size_t>(i) * batch.max_len + t];
      if (s < 0 || s >= n) throw Error("trajectory state outside world");
      svf.visits[s] += 1.0;
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (double& v : svf.visits) v *= scale;
  return svf;
}

GradientRecord maxent_gradient(const SVF& expert, const SVF& expected,
                               const RewardModel& model, const World& world,
                               double lambda) {
  const int n = world.num_states();
  if (static_cast<int>(expert.visits.size()) != n ||
      static_cast<int>(expected.visits.size()) != n) {
    throw Error("SVF size mismatch");
  }
  std::vector<double> upstream(n);
  for (int s = 0; s < n; ++s) upstream[s] = expert.visits[s] - expected.visits[s];
  GradientRecord grad =
      model.backward_batch(world.feature_matrix(), n, upstream);
  if (lambda > 0.0) {
    auto theta = model.theta();
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] -= lambda * theta[i];
  }
  return grad;
}

LikelihoodStats log_likelihood(const std::vector<Trajectory>& trips,
                               const SoftSolution& solution) {
  LikelihoodStats stats;
  for (const auto& trip : trips) {
    double ll = 0.0;
    bool ok = true;
    for (const auto& step : trip.steps) {
      const double p = solution.policy_at(step.state, step.action);
      if (p <= 0.0) {
        ok = false;
        break;
      }
      ll += std::log(p);
    }
    if (ok) {
      stats.log_likelihood += ll;
      ++stats.trips_used;
    } else {
      ++stats.trips_excluded;
    }
  }
  return stats;
}

std::map<int, std::vector<int>> group_by_goal(const TrajectoryBatch& batch) {
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < batch.size(); ++i) {
    groups[batch.trajectories[i].destination].push_back(i);
  }
  return groups;
}

namespace {

struct GoalWorkspace {
  int goal = 0;
  std::vector<int> trips;
  std::vector<double> origin_dist;
  std::vector<double> warm_v;
  SVF svf;
  LikelihoodStats ll;
  double residual = 0.0;
  bool has_warm = false;
};

// One full objective evaluation at the current model: per-goal soft VI
// (warm-started), expected SVF, and log-likelihood.
struct EpochEval {
  double ll = 0.0;
  double mean_residual = 0.0;
  std::size_t excluded = 0;
  std::vector<double> expected;  // aggregated, per-trajectory normalized
};

EpochEval evaluate_epoch(const World& world, const TrajectoryBatch& batch,
                         const std::vector<double>& rewards,
                         std::vector<GoalWorkspace>& goals,
                         const TrainConfig& cfg, int horizon) {
  const int n = world.num_states();
  const int ngoals = static_cast<int>(goals.size());

  std::exception_ptr failure;
  bool failed = false;
#pragma omp parallel for schedule(dynamic)
  for (int g = 0; g < ngoals; ++g) {
    bool skip;
#pragma omp atomic read
    skip = failed;
    if (skip) continue;
    try {
      GoalWorkspace& ws = goals[g];
      SoftSolution sol = soft_value_iteration(
          world, rewards, ws.goal, cfg.gamma, cfg.vi_tol, cfg.vi_max_iters,
          ws.has_warm ? &ws.warm_v : nullptr);
      ws.warm_v = sol.V;
      ws.has_warm = true;
      ws.residual = sol.residual;
      ws.svf = expected_svf(world, sol, ws.origin_dist, horizon);

      std::vector<Trajectory> trips;
      trips.reserve(ws.trips.size());
      for (int idx : ws.trips) trips.push_back(batch.trajectories[idx]);
      ws.ll = log_likelihood(trips, sol);
    } catch (...) {
#pragma omp critical
      {
        if (!failure) failure = std::current_exception();
#pragma omp atomic write
        failed = true;
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  EpochEval eval;
  eval.expected.assign(n, 0.0);
  const double inv_trips = 1.0 / static_cast<double>(batch.size());
  for (const GoalWorkspace& ws : goals) {
    const double w = static_cast<double>(ws.trips.size()) * inv_trips;
    for (int s = 0; s < n; ++s) eval.expected[s] += w * ws.svf.visits[s];
    eval.ll += ws.ll.log_likelihood;
    eval.excluded += ws.ll.trips_excluded;
    eval.mean_residual += ws.residual;
  }
  eval.mean_residual /= static_cast<double>(ngoals);
  return eval;
}

double grad_norm(const GradientRecord& g) {
  double acc = 0.0;
  for (double v : g) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace

TrainResult train(const World& world, const TrajectoryBatch& batch,
                  const TrainConfig& cfg) {
  if (batch.size() == 0) throw Error("training batch is empty");
  const int n = world.num_states();
  const int horizon = cfg.horizon > 0 ? cfg.horizon : default_horizon(world);

  // Expected SVF inside expected_svf ignores masked steps by construction;
  // the expert side is computed once up front.
  const SVF expert = expert_svf(batch, world);

  std::vector<GoalWorkspace> goals;
  for (auto& [goal, trips] : group_by_goal(batch)) {
    GoalWorkspace ws;
    ws.goal = goal;
    ws.trips = trips;
    ws.origin_dist.assign(n, 0.0);
    const double w = 1.0 / static_cast<double>(trips.size());
    for (int idx : trips) ws.origin_dist[batch.trajectories[idx].origin] += w;
    goals.push_back(std::move(ws));
  }

  TrainResult result;
  result.model =
      RewardModel::init(cfg.seed, world.feature_dim(), cfg.width, cfg.depth);
  AdamState adam;
  adam.lr = cfg.learning_rate;

  // Snapshot for the monotone guard.
  RewardModel prev_model = result.model;
  AdamState prev_adam = adam;
  GradientRecord prev_grad;
  double prev_ll = -std::numeric_limits<double>::infinity();
  double lr_scale = 1.0;
  int backtracks = 0;

  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<double> rewards = result.model.forward_batch(world.feature_matrix(), n);
    EpochEval eval = evaluate_epoch(world, batch, rewards, goals, cfg, horizon);

    if (!result.history.empty() && eval.ll < prev_ll - cfg.dip_tol &&
        backtracks < cfg.max_backtracks) {
      // Overshot: rewind parameters and optimizer, retry the previous
      // gradient at half the scale. The dipped evaluation is discarded.
      ++backtracks;
      lr_scale *= 0.5;
      result.model = prev_model;
      adam = prev_adam;
      adam.step(result.model.theta(), prev_grad, cfg.lambda, lr_scale);
      --epoch;
      continue;
    }

    SVF expected;
    expected.visits = std::move(eval.expected);
    expected.horizon = horizon;
    GradientRecord grad =
        maxent_gradient(expert, expected, result.model, world, cfg.lambda);

    EpochRecord rec;
    rec.epoch = static_cast<int>(result.history.size());
    rec.log_likelihood = eval.ll;
    rec.grad_norm = grad_norm(grad);
    rec.mean_residual = eval.mean_residual;
    rec.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    result.history.push_back(rec);
    result.trips_excluded = eval.excluded;
    prev_ll = eval.ll;

    prev_model = result.model;
    prev_adam = adam;
    prev_grad = grad;
    adam.step(result.model.theta(), grad, cfg.lambda, lr_scale);
    lr_scale = std::min(1.0, lr_scale * 1.05);

    if (!result.model.finite()) {
      throw Error("training diverged: non-finite parameters at epoch " +
                  std::to_string(epoch));
    }
  }
  return result;
}

std::string TrainResult::history_csv() const {
  std::ostringstream out;
  out.precision(12);
  out << "epoch,log_likelihood,grad_norm,mean_residual,wall_time_ms\n";
  for (const auto& rec : history) {
    out << rec.epoch << ',' << rec.log_likelihood << ',' << rec.grad_norm << ','
        << rec.mean_residual << ',' << rec.wall_time_ms << '\n';
  }
  return out.str();
}

}  // namespace velopref

#include "velopref/serial_ref.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace velopref::serial {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

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

SoftSolution soft_value_iteration(const World& world,
                                  const std::vector<double>& rewards, int goal,
                                  double gamma, double tol, int max_iters) {
  const int n = world.num_states();
  SoftSolution sol;
  sol.goal = goal;
  sol.gamma = gamma;
  sol.V.assign(n, 0.0);
  std::vector<double> v_next(n, 0.0);

  double residual = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < max_iters && residual > tol; ++iter) {
    residual = 0.0;
    for (int s = 0; s < n; ++s) {
      if (s == goal) {
        v_next[s] = 0.0;
        continue;
      }
      double q[kNumActions];
      for (int a = 0; a < kNumActions; ++a) {
        const int ns = world.next_state(s, static_cast<Action>(a));
        q[a] = ns < 0 ? kNegInf : rewards[s] + gamma * sol.V[ns];
      }
      const double v = logsumexp_row(q, kNumActions);
      residual = std::max(residual, std::abs(v - sol.V[s]));
      v_next[s] = v;
    }
    std::swap(sol.V, v_next);
    if (!std::isfinite(residual)) break;
  }
  sol.iterations = iter;
  sol.residual = residual;
  if (residual > tol) {
    std::ostringstream msg;
    msg << "serial soft value iteration did not converge: residual " << residual;
    throw ConvergenceError(msg.str(), residual);
  }

  sol.Q.assign(static_cast<std::size_t>(n) * kNumActions, kNegInf);
  sol.policy.assign(static_cast<std::size_t>(n) * kNumActions, 0.0);
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
    for (int a = 0; a < kNumActions; ++a) prow[a] /= total;
  }
  return sol;
}

SVF expected_svf(const World& world, const SoftSolution& solution,
                 const std::vector<double>& origin_dist, int horizon) {
  const int n = world.num_states();
  SVF svf;
  svf.horizon = horizon;
  svf.visits.assign(n, 0.0);
  svf.step_mass.assign(horizon, 0.0);
  std::vector<double> d = origin_dist;
  std::vector<double> d_next(n);
  const int goal = solution.goal;

  for (int t = 0; t < horizon; ++t) {
    for (int s = 0; s < n; ++s) svf.step_mass[t] += d[s];
    for (int s = 0; s < n; ++s) {
      if (s != goal) svf.visits[s] += d[s];
    }
    std::fill(d_next.begin(), d_next.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      if (d[s] == 0.0) continue;
      for (int a = 0; a < kNumActions; ++a) {
        const double p =
            solution.policy[static_cast<std::size_t>(s) * kNumActions + a];
        if (p <= 0.0) continue;
        const int ns = world.next_state(s, static_cast<Action>(a));
        d_next[ns] += d[s] * p;
      }
    }
    std::swap(d, d_next);
  }
  svf.absorbed = d[goal];
  for (int s = 0; s < n; ++s) {
    if (s != goal) svf.tail_mass += d[s];
  }
  return svf;
}

std::vector<double> forward_batch(const RewardModel& model,
                                  const std::vector<double>& features, int n) {
  std::vector<double> out(n);
  const int d = model.input_dim();
  for (int i = 0; i < n; ++i) {
    out[i] = model.forward(std::span<const double>(
        features.data() + static_cast<std::size_t>(i) * d, d));
  }
  return out;
}

GradientRecord backward_batch(const RewardModel& model,
                              const std::vector<double>& features, int n,
                              const std::vector<double>& upstream) {
  GradientRecord grad(model.param_count(), 0.0);
  const int d = model.input_dim();
  for (int i = 0; i < n; ++i) {
    if (upstream[i] == 0.0) continue;
    model.backward(std::span<const double>(
                       features.data() + static_cast<std::size_t>(i) * d, d),
                   upstream[i], grad);
  }
  return grad;
}

}  // namespace velopref::serial

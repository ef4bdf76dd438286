#include "velopref/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "velopref/grid_world.hpp"
#include "velopref/rng.hpp"
#include <json.hpp>

namespace velopref {

ShapleyReport exact_shapley(const CoalitionGame& game) {
  if (game.n < 1) throw Error("game needs at least one player");
  if (game.n > kExactShapleyMaxPlayers) {
    throw Error("exact Shapley enumeration is guarded at n <= " +
                std::to_string(kExactShapleyMaxPlayers) +
                "; use sampled_shapley");
  }
  const int n = game.n;
  const std::uint32_t full = (1u << n) - 1;

  // One value evaluation per coalition, memoized up front.
  std::vector<double> v(full + 1);
  for (std::uint32_t mask = 0; mask <= full; ++mask) v[mask] = game.value(mask);

  std::vector<double> factorial(n + 1, 1.0);
  for (int i = 1; i <= n; ++i) factorial[i] = factorial[i - 1] * i;

  ShapleyReport report;
  report.method = ShapleyMethod::exact;
  report.baseline = v[0];
  report.full_value = v[full];
  report.phi.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const std::uint32_t bit = 1u << i;
    double phi = 0.0;
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
      if (mask & bit) continue;
      const int size = std::popcount(mask);
      const double weight =
          factorial[size] * factorial[n - size - 1] / factorial[n];
      phi += weight * (v[mask | bit] - v[mask]);
    }
    report.phi[i] = phi;
  }
  return report;
}

ShapleyReport sampled_shapley(const CoalitionGame& game, std::size_t samples,
                              std::uint64_t seed) {
  if (game.n < 1) throw Error("game needs at least one player");
  if (samples < 1) throw Error("samples must be >= 1");
  const int n = game.n;

  ShapleyReport report;
  report.method = ShapleyMethod::sampled;
  report.samples = samples;
  report.baseline = game.value(0);
  report.full_value = game.value((1u << n) - 1);
  report.phi.assign(n, 0.0);
  report.stderr_phi.assign(n, 0.0);

  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  std::vector<int> order(n);
  Rng rng(seed);
  for (std::size_t it = 0; it < samples; ++it) {
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_int(i + 1));
      std::swap(order[i], order[j]);
    }
    std::uint32_t mask = 0;
    double prev = report.baseline;
    for (int idx : order) {
      mask |= 1u << idx;
      const double cur = game.value(mask);
      const double marginal = cur - prev;
      sum[idx] += marginal;
      sum_sq[idx] += marginal * marginal;
      prev = cur;
    }
  }
  const double m = static_cast<double>(samples);
  for (int i = 0; i < n; ++i) {
    report.phi[i] = sum[i] / m;
    if (samples > 1) {
      const double var =
          std::max(0.0, (sum_sq[i] - sum[i] * sum[i] / m) / (m - 1.0));
      report.stderr_phi[i] = std::sqrt(var / m);
    }
  }
  return report;
}

CoalitionGame reward_game(const RewardModel& model,
                          const std::vector<double>& instance,
                          const std::vector<std::vector<double>>& background) {
  const int d = model.input_dim();
  if (static_cast<int>(instance.size()) != d) throw Error("instance dimension mismatch");
  if (background.empty()) throw Error("background set must be non-empty");
  for (const auto& row : background) {
    if (static_cast<int>(row.size()) != d) throw Error("background dimension mismatch");
  }

  CoalitionGame game;
  game.n = d;
  game.value = [&model, instance, background, d](std::uint32_t mask) {
    std::vector<double> x(d);
    double total = 0.0;
    for (const auto& row : background) {
      for (int k = 0; k < d; ++k) {
        x[k] = (mask & (1u << k)) ? instance[k] : row[k];
      }
      total += model.forward(x);
    }
    return total / static_cast<double>(background.size());
  };
  return game;
}

std::vector<std::vector<double>> sample_background(const World& world,
                                                   std::size_t count,
                                                   std::uint64_t seed) {
  if (count < 1) throw Error("background count must be >= 1");
  Rng rng(seed);
  const int d = world.feature_dim();
  std::vector<std::vector<double>> rows;
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int s = static_cast<int>(rng.uniform_int(world.num_states()));
    rows.emplace_back(world.state_features(s), world.state_features(s) + d);
  }
  return rows;
}

GlobalImportance global_importance(const RewardModel& model, const World& world,
                                   const std::vector<std::vector<double>>& background,
                                   std::size_t budget, std::uint64_t seed) {
  if (budget < 1) throw Error("budget must be >= 1");
  const int n = world.num_states();
  const int d = world.feature_dim();
  const bool exact = d <= kExactShapleyMaxPlayers;

  GlobalImportance gi;
  gi.method = exact ? ShapleyMethod::exact : ShapleyMethod::sampled;
  gi.num_states = n;
  gi.dim = d;
  gi.phi_table.assign(static_cast<std::size_t>(n) * d, 0.0);
  gi.stderr_table.assign(static_cast<std::size_t>(n) * d, 0.0);

#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < n; ++s) {
    std::vector<double> instance(world.state_features(s),
                                 world.state_features(s) + d);
    const CoalitionGame game = reward_game(model, instance, background);
    const ShapleyReport report =
        exact ? exact_shapley(game)
              : sampled_shapley(game, budget,
                                derive_seed(seed, static_cast<std::uint64_t>(s)));
    for (int k = 0; k < d; ++k) {
      gi.phi_table[static_cast<std::size_t>(s) * d + k] = report.phi[k];
      if (!exact) {
        gi.stderr_table[static_cast<std::size_t>(s) * d + k] =
            report.stderr_phi[k];
      }
    }
  }

  gi.mean_abs_phi.assign(d, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int k = 0; k < d; ++k) {
      gi.mean_abs_phi[k] += std::abs(gi.phi_table[static_cast<std::size_t>(s) * d + k]);
    }
  }
  for (double& v : gi.mean_abs_phi) v /= static_cast<double>(n);
  gi.ranking.resize(d);
  std::iota(gi.ranking.begin(), gi.ranking.end(), 0);
  std::stable_sort(gi.ranking.begin(), gi.ranking.end(), [&](int a, int b) {
    return gi.mean_abs_phi[a] > gi.mean_abs_phi[b];
  });
  return gi;
}

std::string GlobalImportance::phi_csv(const World& world) const {
  std::ostringstream out;
  out.precision(12);
  out << "state_id,feature_id,feature_value,phi,method,stderr\n";
  const char* name = method == ShapleyMethod::exact ? "exact" : "sampled";
  for (int s = 0; s < num_states; ++s) {
    for (int k = 0; k < dim; ++k) {
      out << s << ',' << k << ',' << world.state_features(s)[k] << ','
          << phi_table[static_cast<std::size_t>(s) * dim + k] << ',' << name
          << ',' << stderr_table[static_cast<std::size_t>(s) * dim + k] << '\n';
    }
  }
  return out.str();
}

std::vector<std::pair<double, double>> dependence_data(
    const GlobalImportance& importance, const World& world, int feature) {
  if (feature < 0 || feature >= importance.dim) {
    throw Error("feature index out of range");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(importance.num_states);
  for (int s = 0; s < importance.num_states; ++s) {
    out.emplace_back(
        world.state_features(s)[feature],
        importance.phi_table[static_cast<std::size_t>(s) * importance.dim + feature]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string dependence_csv(const GlobalImportance& importance,
                           const World& world, int feature) {
  // Emits both the raw feature axis and its z-scored version, so either
  // style of dependence plot can be drawn downstream.
  const auto pairs = dependence_data(importance, world, feature);
  double mean = 0.0;
  for (const auto& [x, _] : pairs) mean += x;
  mean /= static_cast<double>(pairs.size());
  double var = 0.0;
  for (const auto& [x, _] : pairs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(pairs.size());
  const double sd = std::sqrt(var);

  std::ostringstream out;
  out.precision(12);
  out << "feature_value,feature_value_z,phi\n";
  for (const auto& [x, phi] : pairs) {
    out << x << ',' << (sd > 0.0 ? (x - mean) / sd : 0.0) << ',' << phi << '\n';
  }
  return out.str();
}

std::vector<ShapleyReport> local_trip_attribution(
    const RewardModel& model, const Trajectory& trajectory, const World& world,
    const std::vector<std::vector<double>>& background, std::size_t budget,
    std::uint64_t seed) {
  const int d = world.feature_dim();
  const bool exact = d <= kExactShapleyMaxPlayers;
  std::vector<ShapleyReport> out;
  out.reserve(trajectory.steps.size());
  for (const auto& step : trajectory.steps) {
    std::vector<double> instance(world.state_features(step.state),
                                 world.state_features(step.state) + d);
    const CoalitionGame game = reward_game(model, instance, background);
    ShapleyReport report =
        exact ? exact_shapley(game)
              : sampled_shapley(game, budget,
                                derive_seed(seed, static_cast<std::uint64_t>(
                                                      step.state)));
    report.instance_id = step.state;
    out.push_back(std::move(report));
  }
  return out;
}

std::string group_summary_json(const GlobalImportance& importance,
                               const std::vector<std::string>& groups) {
  if (static_cast<int>(groups.size()) != importance.dim) {
    throw Error("one group label per feature required");
  }
  std::map<std::string, double> total;
  std::map<std::string, int> sizes;
  for (int k = 0; k < importance.dim; ++k) {
    total[groups[k]] += importance.mean_abs_phi[k];
    ++sizes[groups[k]];
  }
  nlohmann::json j;
  j["mean_abs_phi_by_feature"] = importance.mean_abs_phi;
  j["ranking"] = importance.ranking;
  nlohmann::json by_group = nlohmann::json::object();
  for (const auto& [group, sum] : total) {
    by_group[group] = {{"total_mean_abs_phi", sum},
                       {"features", sizes[group]}};
  }
  j["groups"] = std::move(by_group);
  return j.dump(2);
}

}  // namespace velopref

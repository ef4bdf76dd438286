#include "velopref/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace velopref {

Distribution Distribution::from_counts(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0 || !std::isfinite(c)) throw Error("negative or non-finite count");
    total += c;
  }
  if (total <= 0.0) throw Error("cannot normalize an all-zero count vector");
  Distribution d;
  d.p.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) d.p[i] = counts[i] / total;
  return d;
}

void Distribution::validate() const {
  double total = 0.0;
  for (double v : p) {
    if (v < 0.0 || !std::isfinite(v)) throw Error("invalid probability entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("probabilities do not sum to 1");
}

double kl(const Distribution& p, const Distribution& q, double smoothing) {
  if (p.p.size() != q.p.size()) throw Error("KL requires a shared support");
  const std::size_t n = p.p.size();
  std::vector<double> ps = p.p, qs = q.p;
  if (smoothing > 0.0) {
    double pt = 0.0, qt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ps[i] += smoothing;
      qs[i] += smoothing;
      pt += ps[i];
      qt += qs[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      ps[i] /= pt;
      qs[i] /= qt;
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ps[i] == 0.0) continue;
    if (qs[i] == 0.0) {
      throw Error("KL undefined: p has mass where q is zero (index " +
                  std::to_string(i) + ")");
    }
    total += ps[i] * std::log(ps[i] / qs[i]);
  }
  return total;
}

double jsd(const Distribution& p, const Distribution& q) {
  if (p.p.size() != q.p.size()) throw Error("JSD requires a shared support");
  Distribution m;
  m.p.resize(p.p.size());
  for (std::size_t i = 0; i < p.p.size(); ++i) m.p[i] = 0.5 * (p.p[i] + q.p[i]);
  const double d = 0.5 * (kl(p, m) + kl(q, m));
  return std::sqrt(std::max(0.0, d));
}

double cpc(const Trajectory& t1, const Trajectory& t2, const World& world) {
  if (t1.steps.empty() && t1.origin == t1.destination && t1.segment_count == 0) {
    throw Error("empty trajectory");
  }
  std::set<int> c1, c2;
  for (int s : t1.state_sequence()) c1.insert(world.cell_of_state(s));
  for (int s : t2.state_sequence()) c2.insert(world.cell_of_state(s));
  if (c1.empty() || c2.empty()) throw Error("empty trajectory");
  std::size_t common = 0;
  for (int c : c1) common += c2.count(c);
  return 2.0 * static_cast<double>(common) /
         static_cast<double>(c1.size() + c2.size());
}

Distribution svf_distribution(const std::vector<Trajectory>& trajs,
                              const World& world) {
  if (trajs.empty()) throw Error("svf_distribution: empty input");
  // Counts decision states, like expert_svf, so the two agree up to the
  // normalization constant.
  std::vector<double> counts(world.num_states(), 0.0);
  for (const auto& t : trajs) {
    for (const auto& step : t.steps) counts[step.state] += 1.0;
  }
  return Distribution::from_counts(counts);
}

std::pair<double, double> reward_stats(const std::vector<double>& rewards) {
  if (rewards.size() < 2) throw Error("reward_stats needs >= 2 states");
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  const double span = *hi - *lo;
  if (span <= 0.0) return {0.0, 0.0};
  double mean = 0.0;
  for (double r : rewards) mean += (r - *lo) / span;
  mean /= static_cast<double>(rewards.size());
  double var = 0.0;
  for (double r : rewards) {
    const double z = (r - *lo) / span - mean;
    var += z * z;
  }
  var /= static_cast<double>(rewards.size());
  return {mean, var};
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

std::vector<CpcBin> cpc_by_decision_frequency(
    const std::vector<PairedTrajectories>& pairs, const World& world) {
  if (pairs.empty()) throw Error("cpc_by_decision_frequency: empty input");
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> bins;
  for (const auto& pair : pairs) {
    auto& [synth, shortest] = bins[pair.real.segment_count];
    synth.push_back(cpc(pair.real, pair.synthetic, world));
    shortest.push_back(cpc(pair.real, pair.shortest, world));
  }
  std::vector<CpcBin> out;
  for (auto& [decisions, values] : bins) {
    auto& [synth, shortest] = values;
    std::sort(synth.begin(), synth.end());
    std::sort(shortest.begin(), shortest.end());
    CpcBin bin;
    bin.decisions = decisions;
    bin.count = synth.size();
    for (double v : synth) bin.mean_synthetic += v;
    bin.mean_synthetic /= static_cast<double>(synth.size());
    for (double v : shortest) bin.mean_shortest += v;
    bin.mean_shortest /= static_cast<double>(shortest.size());
    bin.q1_synthetic = quantile_sorted(synth, 0.25);
    bin.median_synthetic = quantile_sorted(synth, 0.5);
    bin.q3_synthetic = quantile_sorted(synth, 0.75);
    bin.q1_shortest = quantile_sorted(shortest, 0.25);
    bin.median_shortest = quantile_sorted(shortest, 0.5);
    bin.q3_shortest = quantile_sorted(shortest, 0.75);
    out.push_back(bin);
  }
  return out;
}

EvalReport evaluate_pairs(const std::vector<PairedTrajectories>& pairs,
                          const std::vector<double>& state_rewards,
                          const World& world, bool include_nonterminated_cpc) {
  if (pairs.empty()) throw Error("evaluate_pairs: empty input");
  EvalReport report;

  std::vector<Trajectory> real, synthetic, shortest;
  std::vector<PairedTrajectories> cpc_pairs;
  for (const auto& pair : pairs) {
    real.push_back(pair.real);
    synthetic.push_back(pair.synthetic);
    shortest.push_back(pair.shortest);
    if (pair.synthetic.terminated || include_nonterminated_cpc) {
      cpc_pairs.push_back(pair);
    } else {
      ++report.pairs_skipped;
    }
  }
  report.pairs_used = cpc_pairs.size();
  if (cpc_pairs.empty()) throw Error("no pairs usable for CPC");

  for (const auto& pair : cpc_pairs) {
    report.mean_cpc_synthetic += cpc(pair.real, pair.synthetic, world);
    report.mean_cpc_shortest += cpc(pair.real, pair.shortest, world);
  }
  report.mean_cpc_synthetic /= static_cast<double>(cpc_pairs.size());
  report.mean_cpc_shortest /= static_cast<double>(cpc_pairs.size());

  const Distribution d_real = svf_distribution(real, world);
  const Distribution d_synth = svf_distribution(synthetic, world);
  const Distribution d_short = svf_distribution(shortest, world);
  report.jsd_synthetic = jsd(d_real, d_synth);
  report.jsd_shortest = jsd(d_real, d_short);

  report.cpc_by_decision_bin = cpc_by_decision_frequency(cpc_pairs, world);
  std::tie(report.reward_mean, report.reward_variance) =
      reward_stats(state_rewards);
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["jsd_synthetic"] = jsd_synthetic;
  j["jsd_shortest"] = jsd_shortest;
  j["mean_cpc_synthetic"] = mean_cpc_synthetic;
  j["mean_cpc_shortest"] = mean_cpc_shortest;
  j["pairs_used"] = pairs_used;
  j["pairs_skipped"] = pairs_skipped;
  j["reward_mean"] = reward_mean;
  j["reward_variance"] = reward_variance;
  auto bins = nlohmann::json::array();
  for (const auto& b : cpc_by_decision_bin) {
    bins.push_back({{"decisions", b.decisions},
                    {"count", b.count},
                    {"mean_cpc_synthetic", b.mean_synthetic},
                    {"mean_cpc_shortest", b.mean_shortest},
                    {"q1_synthetic", b.q1_synthetic},
                    {"median_synthetic", b.median_synthetic},
                    {"q3_synthetic", b.q3_synthetic},
                    {"q1_shortest", b.q1_shortest},
                    {"median_shortest", b.median_shortest},
                    {"q3_shortest", b.q3_shortest}});
  }
  j["cpc_by_decision_bin"] = std::move(bins);
  return j.dump(2);
}

std::string EvalReport::cpc_rows_csv(const std::vector<PairedTrajectories>& pairs,
                                     const World& world) const {
  std::ostringstream out;
  out.precision(12);
  out << "pair_index,real_decisions,cpc_synthetic,cpc_shortest,synthetic_terminated\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out << i << ',' << pairs[i].real.segment_count << ','
        << cpc(pairs[i].real, pairs[i].synthetic, world) << ','
        << cpc(pairs[i].real, pairs[i].shortest, world) << ','
        << (pairs[i].synthetic.terminated ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string EvalReport::svf_histogram_csv(const Distribution& real,
                                          const Distribution& synthetic,
                                          const Distribution& shortest) {
  std::ostringstream out;
  out.precision(12);
  out << "state,real,synthetic,shortest\n";
  for (std::size_t s = 0; s < real.p.size(); ++s) {
    out << s << ',' << real.p[s] << ',' << synthetic.p[s] << ','
        << shortest.p[s] << '\n';
  }
  return out.str();
}

}  // namespace velopref

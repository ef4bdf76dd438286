#include "velopref/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "velopref/hashing.hpp"
#include "velopref/map_match.hpp"
#include "velopref/metrics.hpp"
#include "velopref/rng.hpp"
#include "velopref/shapley.hpp"
#include <json.hpp>

namespace velopref {

namespace fs = std::filesystem;

namespace {

// Stream tags for deriving independent child seeds from the global seed.
enum SeedTag : std::uint64_t {
  kSeedExpertOds = 1,
  kSeedExpertRollouts = 2,
  kSeedEvalOds = 3,
  kSeedEvalRollouts = 4,
  kSeedBackground = 5,
};

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  return fs::path(cfg.output_dir) / name;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("missing input file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Manifest {
 public:
  Manifest(const RunConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)) {}

  void input(const fs::path& path) {
    j_["inputs"][path.filename().string()] = digest_hex(fnv1a64_file(path.string()));
  }
  void output(const fs::path& path) {
    j_["outputs"][path.filename().string()] = digest_hex(fnv1a64_file(path.string()));
  }
  // Files whose bytes contain wall-clock content; listed but not digested.
  void volatile_output(const fs::path& path) {
    j_["volatile_outputs"].push_back(path.filename().string());
  }
  void note(const std::string& key, const nlohmann::json& value) {
    j_["notes"][key] = value;
  }

  void write() {
    j_["command"] = command_;
    j_["version"] = kVersion;
    j_["seed"] = cfg_.seed;
    j_["config_digest"] = digest_hex(cfg_.config_digest);
    write_file(out_path(cfg_, "manifest_" + command_ + ".json"), j_.dump(2) + "\n");
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  nlohmann::json j_;
};

World load_world(const RunConfig& cfg, Manifest* manifest) {
  fs::path path;
  if (cfg.world.source == "file") {
    path = cfg.world.path;
  } else {
    path = out_path(cfg, "world.json");
  }
  const std::string text = read_file(path);
  if (manifest) manifest->input(path);
  return World::from_json(text);
}

std::vector<double> load_planted_rewards(const RunConfig& cfg, const World& world,
                                         Manifest* manifest) {
  const fs::path path = out_path(cfg, "planted_rewards.csv");
  const std::string text = read_file(path);
  if (manifest) manifest->input(path);
  std::vector<double> rewards(world.num_states(), 0.0);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int state, cell;
    double reward;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &state, &cell, &reward) != 3) {
      throw ValidationError("malformed planted_rewards.csv line: " + line);
    }
    if (state < 0 || state >= world.num_states()) {
      throw ValidationError("planted reward state out of range");
    }
    rewards[state] = reward;
    ++rows;
  }
  if (rows != world.num_states()) {
    throw ValidationError("planted_rewards.csv does not cover all states");
  }
  return rewards;
}

std::vector<Trajectory> load_trajectories(const World& world, const fs::path& path,
                                          Manifest* manifest) {
  const std::string text = read_file(path);
  if (manifest) manifest->input(path);
  return trajectories_from_json(text, world);
}

// Destination-reachability over the passable graph, for OD sampling on
// worlds loaded from files (synthetic worlds are connected by build).
std::vector<char> reachable_from(const World& world, int origin) {
  std::vector<char> seen(world.num_states(), 0);
  std::vector<int> stack{origin};
  seen[origin] = 1;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int a = 0; a < kNumActions; ++a) {
      const int ns = world.next_state(s, static_cast<Action>(a));
      if (ns >= 0 && !seen[ns]) {
        seen[ns] = 1;
        stack.push_back(ns);
      }
    }
  }
  return seen;
}

struct OdSample {
  std::vector<std::pair<int, int>> pairs;
  int resampled = 0;
};

OdSample sample_od_pairs(const World& world, int count, int min_manhattan_cells,
                         std::uint64_t seed,
                         const std::set<std::pair<int, int>>& exclude) {
  Rng rng(seed);
  OdSample out;
  std::set<std::pair<int, int>> chosen;
  const int n = world.num_states();
  const int budget = 1000 * count + 1000;
  for (int attempts = 0; static_cast<int>(out.pairs.size()) < count; ++attempts) {
    if (attempts > budget) {
      throw Error("could not sample enough OD pairs; relax od_min_manhattan");
    }
    const int origin = static_cast<int>(rng.uniform_int(n));
    const int dest = static_cast<int>(rng.uniform_int(n));
    const std::pair<int, int> od{origin, dest};
    const int manhattan_cells =
        std::abs(world.row_of_state(origin) - world.row_of_state(dest)) +
        std::abs(world.col_of_state(origin) - world.col_of_state(dest));
    if (origin == dest || manhattan_cells < min_manhattan_cells ||
        chosen.count(od) || exclude.count(od)) {
      ++out.resampled;
      continue;
    }
    if (!reachable_from(world, origin)[dest]) {
      ++out.resampled;
      continue;
    }
    chosen.insert(od);
    out.pairs.push_back(od);
  }
  return out;
}

std::vector<double> expert_vi_rewards(const RunConfig& cfg,
                                      const std::vector<double>& planted) {
  std::vector<double> rewards(planted.size());
  for (std::size_t s = 0; s < planted.size(); ++s) {
    rewards[s] = cfg.experts.reward_offset + cfg.experts.reward_scale * planted[s];
  }
  return rewards;
}

// Solves one goal-conditioned MDP per unique destination, in goal order.
std::map<int, SoftSolution> solve_goals(const World& world,
                                        const std::vector<double>& rewards,
                                        const std::set<int>& goals,
                                        const TrainConfig& train) {
  std::vector<int> goal_list(goals.begin(), goals.end());
  std::vector<SoftSolution> solutions(goal_list.size());
  std::exception_ptr failure;
  bool failed = false;
#pragma omp parallel for schedule(dynamic)
  for (int g = 0; g < static_cast<int>(goal_list.size()); ++g) {
    bool skip;
#pragma omp atomic read
    skip = failed;
    if (skip) continue;
    try {
      solutions[g] = soft_value_iteration(world, rewards, goal_list[g],
                                          train.gamma, train.vi_tol,
                                          train.vi_max_iters);
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
  std::map<int, SoftSolution> out;
  for (std::size_t g = 0; g < goal_list.size(); ++g) {
    out[goal_list[g]] = std::move(solutions[g]);
  }
  return out;
}

int rollout_cap(const World& world, int configured) {
  return configured > 0 ? configured : default_horizon(world);
}

}  // namespace

void cmd_gen_world(const RunConfig& cfg) {
  if (cfg.world.source != "synthetic") {
    throw ValidationError("gen-world requires world.source = 'synthetic'");
  }
  SynthConfig synth;
  synth.rows = cfg.world.rows;
  synth.cols = cfg.world.cols;
  synth.blocked_fraction = cfg.world.blocked_fraction;
  synth.feature_dim = cfg.world.feature_dim;
  synth.seed = cfg.seed;
  SyntheticWorld result = generate_synthetic_world(synth);

  Manifest manifest(cfg, "gen-world");
  const fs::path world_path = out_path(cfg, "world.json");
  write_file(world_path, result.world.to_json() + "\n");
  manifest.output(world_path);

  std::ostringstream csv;
  csv.precision(17);
  csv << "state,cell,planted_reward\n";
  for (int s = 0; s < result.world.num_states(); ++s) {
    csv << s << ',' << result.world.cell_of_state(s) << ','
        << result.planted_rewards[s] << '\n';
  }
  const fs::path rewards_path = out_path(cfg, "planted_rewards.csv");
  write_file(rewards_path, csv.str());
  manifest.output(rewards_path);
  manifest.note("num_states", result.world.num_states());
  manifest.note("planted_weights", result.planted_weights);
  manifest.write();
  std::cout << "gen-world: " << result.world.num_states() << " states, "
            << result.world.feature_dim() << " features\n";
}

void cmd_gen_experts(const RunConfig& cfg) {
  Manifest manifest(cfg, "gen-experts");
  const World world = load_world(cfg, &manifest);
  const std::vector<double> planted = load_planted_rewards(cfg, world, &manifest);
  const std::vector<double> rewards = expert_vi_rewards(cfg, planted);

  const OdSample ods =
      sample_od_pairs(world, cfg.experts.od_pairs, cfg.experts.od_min_manhattan,
                      derive_seed(cfg.seed, kSeedExpertOds), {});
  std::set<int> goals;
  for (const auto& [_, dest] : ods.pairs) goals.insert(dest);
  const auto solutions = solve_goals(world, rewards, goals, cfg.train);

  const int max_steps = rollout_cap(world, cfg.experts.max_steps);
  std::vector<Trajectory> trips(cfg.experts.count);
  int restarts = 0;
  const std::uint64_t roll_seed = derive_seed(cfg.seed, kSeedExpertRollouts);
#pragma omp parallel for schedule(dynamic) reduction(+ : restarts)
  for (int i = 0; i < cfg.experts.count; ++i) {
    const auto& [origin, dest] = ods.pairs[i % ods.pairs.size()];
    const SoftSolution& sol = solutions.at(dest);
    Trajectory traj;
    for (int attempt = 0; attempt < 100; ++attempt) {
      RolloutConfig rc;
      rc.mode = RolloutMode::stochastic;
      rc.max_steps = max_steps;
      rc.seed = derive_seed(roll_seed, static_cast<std::uint64_t>(i) * 128 + attempt);
      traj = rollout(world, sol, origin, rc);
      if (traj.terminated) break;
      ++restarts;
    }
    traj.order_id = "expert-" + std::to_string(i);
    trips[i] = std::move(traj);
  }

  const fs::path out = out_path(cfg, cfg.experts.output);
  write_file(out, trajectories_to_json(trips, world) + "\n");
  manifest.output(out);
  manifest.note("od_pairs", ods.pairs.size());
  manifest.note("od_resampled", ods.resampled);
  manifest.note("rollout_restarts", restarts);
  if (cfg.experts.count == 0) {
    std::cerr << "warning: experts.count is 0, wrote an empty trajectory file\n";
  }
  manifest.write();
  std::cout << "gen-experts: " << trips.size() << " trajectories over "
            << ods.pairs.size() << " OD pairs (" << restarts << " restarts)\n";
}

void cmd_train(const RunConfig& cfg) {
  Manifest manifest(cfg, "train");
  const World world = load_world(cfg, &manifest);
  const auto trips = load_trajectories(
      world, out_path(cfg, cfg.trajectories.path), &manifest);
  if (trips.empty()) throw ValidationError("no trajectories to train on");

  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = cfg.seed;
  const TrajectoryBatch batch = pad_and_mask(trips);
  const TrainResult result = train(world, batch, train_cfg);

  const fs::path model_path = out_path(cfg, "model.json");
  write_file(model_path, result.model.to_json() + "\n");
  manifest.output(model_path);
  const fs::path history_path = out_path(cfg, "history.csv");
  write_file(history_path, result.history_csv());
  manifest.volatile_output(history_path);  // wall_time_ms column
  manifest.note("epochs_recorded", result.history.size());
  manifest.note("final_log_likelihood", result.history.back().log_likelihood);
  manifest.note("final_grad_norm", result.history.back().grad_norm);
  manifest.note("trips_excluded", result.trips_excluded);
  manifest.write();
  std::cout << "train: " << result.history.size() << " epochs, final ll "
            << result.history.back().log_likelihood << ", grad norm "
            << result.history.back().grad_norm << "\n";
}

void cmd_rollout(const RunConfig& cfg) {
  Manifest manifest(cfg, "rollout");
  const World world = load_world(cfg, &manifest);

  const std::string model_text = read_file(out_path(cfg, "model.json"));
  manifest.input(out_path(cfg, "model.json"));
  const RewardModel model = RewardModel::from_json(model_text);
  if (model.input_dim() != world.feature_dim()) {
    throw ValidationError("model input dimension does not match world features");
  }
  const std::vector<double> learned =
      model.forward_batch(world.feature_matrix(), world.num_states());

  // The "real" member of each pair: either the planted-reward policy's
  // modal trajectory on freshly sampled ODs, or observed trajectories.
  std::vector<std::pair<int, int>> od_list;
  std::vector<Trajectory> real;
  std::map<int, SoftSolution> planted_solutions;
  if (cfg.rollout.real_source == "planted") {
    const std::vector<double> planted = load_planted_rewards(cfg, world, &manifest);
    const std::vector<double> rewards = expert_vi_rewards(cfg, planted);
    std::set<std::pair<int, int>> exclude;
    const fs::path experts_path = out_path(cfg, cfg.experts.output);
    if (fs::exists(experts_path)) {  // keep evaluation ODs held out
      for (const auto& t : load_trajectories(world, experts_path, &manifest)) {
        exclude.insert({t.origin, t.destination});
      }
    }
    const OdSample ods = sample_od_pairs(
        world, cfg.rollout.od_pairs, cfg.rollout.od_min_manhattan,
        derive_seed(cfg.seed, kSeedEvalOds), exclude);
    od_list = ods.pairs;
    manifest.note("od_resampled", ods.resampled);
    std::set<int> goals;
    for (const auto& [_, dest] : od_list) goals.insert(dest);
    planted_solutions = solve_goals(world, rewards, goals, cfg.train);
    const int max_steps = rollout_cap(world, cfg.rollout.max_steps);
    for (const auto& [origin, dest] : od_list) {
      RolloutConfig rc;
      rc.mode = RolloutMode::greedy;
      rc.max_steps = max_steps;
      real.push_back(rollout(world, planted_solutions.at(dest), origin, rc));
    }
  } else {
    real = load_trajectories(world, out_path(cfg, cfg.trajectories.path),
                             &manifest);
    if (real.empty()) throw ValidationError("no observed trajectories to pair");
    for (const auto& t : real) od_list.push_back({t.origin, t.destination});
  }

  std::set<int> goals;
  for (const auto& [_, dest] : od_list) goals.insert(dest);
  const auto learned_solutions = solve_goals(world, learned, goals, cfg.train);

  const int max_steps = rollout_cap(world, cfg.rollout.max_steps);
  const std::uint64_t roll_seed = derive_seed(cfg.seed, kSeedEvalRollouts);
  std::vector<PairedTrajectories> pairs(od_list.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(od_list.size()); ++i) {
    const auto& [origin, dest] = od_list[i];
    RolloutConfig rc;
    rc.mode = cfg.rollout.mode == "greedy" ? RolloutMode::greedy
                                           : RolloutMode::stochastic;
    rc.max_steps = max_steps;
    rc.seed = derive_seed(roll_seed, static_cast<std::uint64_t>(i));
    pairs[i].real = real[i];
    pairs[i].synthetic = rollout(world, learned_solutions.at(dest), origin, rc);
    pairs[i].shortest = shortest_path(world, origin, dest);
  }

  nlohmann::json arr = nlohmann::json::array();
  for (const auto& pair : pairs) {
    arr.push_back({{"real", nlohmann::json::parse(trajectory_to_json(pair.real, world))},
                   {"synthetic", nlohmann::json::parse(trajectory_to_json(pair.synthetic, world))},
                   {"shortest", nlohmann::json::parse(trajectory_to_json(pair.shortest, world))}});
  }
  const fs::path out = out_path(cfg, cfg.rollout.output);
  write_file(out, arr.dump(1) + "\n");
  manifest.output(out);
  manifest.note("pairs", pairs.size());
  manifest.write();
  std::cout << "rollout: " << pairs.size() << " paired trajectories\n";
}

void cmd_evaluate(const RunConfig& cfg) {
  Manifest manifest(cfg, "evaluate");
  const World world = load_world(cfg, &manifest);
  const std::string model_text = read_file(out_path(cfg, "model.json"));
  manifest.input(out_path(cfg, "model.json"));
  const RewardModel model = RewardModel::from_json(model_text);

  const fs::path paired_path = out_path(cfg, cfg.rollout.output);
  const std::string paired_text = read_file(paired_path);
  manifest.input(paired_path);
  const nlohmann::json arr = nlohmann::json::parse(paired_text);
  std::vector<PairedTrajectories> pairs;
  for (const auto& item : arr) {
    PairedTrajectories p;
    p.real = trajectory_from_json(item.at("real").dump(), world);
    p.synthetic = trajectory_from_json(item.at("synthetic").dump(), world);
    p.shortest = trajectory_from_json(item.at("shortest").dump(), world);
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw ValidationError("paired trajectory file is empty");

  const std::vector<double> rewards =
      model.forward_batch(world.feature_matrix(), world.num_states());
  const EvalReport report = evaluate_pairs(pairs, rewards, world,
                                           cfg.rollout.include_nonterminated_cpc);

  const fs::path report_path = out_path(cfg, "eval.json");
  write_file(report_path, report.to_json() + "\n");
  manifest.output(report_path);
  const fs::path cpc_path = out_path(cfg, "cpc_pairs.csv");
  write_file(cpc_path, report.cpc_rows_csv(pairs, world));
  manifest.output(cpc_path);

  std::vector<Trajectory> real, synthetic, shortest;
  for (const auto& p : pairs) {
    real.push_back(p.real);
    synthetic.push_back(p.synthetic);
    shortest.push_back(p.shortest);
  }
  const fs::path hist_path = out_path(cfg, "svf_histogram.csv");
  write_file(hist_path, EvalReport::svf_histogram_csv(
                            svf_distribution(real, world),
                            svf_distribution(synthetic, world),
                            svf_distribution(shortest, world)));
  manifest.output(hist_path);
  manifest.write();
  std::cout << "evaluate: jsd_synthetic " << report.jsd_synthetic
            << ", jsd_shortest " << report.jsd_shortest << ", cpc_synthetic "
            << report.mean_cpc_synthetic << ", cpc_shortest "
            << report.mean_cpc_shortest << "\n";
}

void cmd_explain(const RunConfig& cfg) {
  Manifest manifest(cfg, "explain");
  const World world = load_world(cfg, &manifest);
  const std::string model_text = read_file(out_path(cfg, "model.json"));
  manifest.input(out_path(cfg, "model.json"));
  const RewardModel model = RewardModel::from_json(model_text);
  if (model.input_dim() != world.feature_dim()) {
    throw ValidationError("model input dimension does not match world features");
  }

  const std::size_t bg_count =
      std::min<std::size_t>(cfg.explain.background, world.num_states());
  const auto background =
      sample_background(world, bg_count, derive_seed(cfg.seed, kSeedBackground));
  const GlobalImportance importance = global_importance(
      model, world, background, cfg.explain.budget, cfg.seed);

  const fs::path phi_path = out_path(cfg, "phi.csv");
  write_file(phi_path, importance.phi_csv(world));
  manifest.output(phi_path);

  for (int k = 0; k < world.feature_dim(); ++k) {
    const fs::path dep_path =
        out_path(cfg, "dependence_" + std::to_string(k) + ".csv");
    write_file(dep_path, dependence_csv(importance, world, k));
    manifest.output(dep_path);
  }

  std::vector<std::string> groups = cfg.explain.feature_groups;
  if (groups.empty()) groups.assign(world.feature_dim(), "ungrouped");
  if (static_cast<int>(groups.size()) != world.feature_dim()) {
    throw ValidationError("explain.feature_groups must have one label per feature");
  }
  const fs::path summary_path = out_path(cfg, "group_summary.json");
  write_file(summary_path, group_summary_json(importance, groups) + "\n");
  manifest.output(summary_path);

  if (!cfg.explain.local_trips.empty()) {
    const auto trips = load_trajectories(
        world, out_path(cfg, cfg.trajectories.path), &manifest);
    for (int idx : cfg.explain.local_trips) {
      if (idx < 0 || idx >= static_cast<int>(trips.size())) {
        throw ValidationError("explain.local_trips index out of range: " +
                              std::to_string(idx));
      }
      const auto reports = local_trip_attribution(
          model, trips[idx], world, background, cfg.explain.budget, cfg.seed);
      std::ostringstream csv;
      csv.precision(12);
      csv << "step,state_id,feature_id,phi\n";
      for (std::size_t t = 0; t < reports.size(); ++t) {
        for (int k = 0; k < world.feature_dim(); ++k) {
          csv << t << ',' << reports[t].instance_id << ',' << k << ','
              << reports[t].phi[k] << '\n';
        }
      }
      const fs::path local_path =
          out_path(cfg, "local_phi_" + std::to_string(idx) + ".csv");
      write_file(local_path, csv.str());
      manifest.output(local_path);
    }
  }
  manifest.note("method", importance.method == ShapleyMethod::exact
                              ? "exact"
                              : "sampled");
  manifest.note("top_feature", importance.ranking.front());
  manifest.write();
  std::cout << "explain: top feature " << importance.ranking.front() << " ("
            << (importance.method == ShapleyMethod::exact ? "exact" : "sampled")
            << ")\n";
}

void cmd_trip_stats(const RunConfig& cfg) {
  Manifest manifest(cfg, "trip-stats");
  const World world = load_world(cfg, &manifest);

  std::vector<Trajectory> trips;
  std::vector<std::string> labels;
  if (cfg.trajectories.source == "raw") {
    const fs::path path = cfg.trajectories.path;
    const ParsedTrips parsed = parse_trips(
        path.string(),
        cfg.trajectories.format == "csv" ? TripFormat::csv : TripFormat::json);
    manifest.input(path);
    for (const auto& issue : parsed.issues) {
      std::cerr << "parse issue at line " << issue.line << ": " << issue.message
                << "\n";
    }
    const FilteredRaw filtered = filter_trips(parsed.trips, cfg.filter);
    nlohmann::json reasons = nlohmann::json::object();
    for (const auto& [reason, count] : filtered.report.counts) {
      reasons[reject_reason_name(reason)] = count;
    }
    manifest.note("raw_rejections", reasons);
    manifest.note("parse_issues", parsed.issues.size());

    std::vector<Trajectory> matched;
    std::map<std::string, std::string> label_of;
    int unmatched = 0;
    for (const auto& trip : filtered.kept) {
      try {
        Trajectory traj =
            to_trajectory(hmm_map_match(trip.points, world, cfg.match), world);
        traj.order_id = trip.order_id;
        matched.push_back(std::move(traj));
        const std::string period = is_weekday(trip.start_time) ? "workday" : "weekend";
        const int hour = hour_of_day(trip.start_time);
        const std::string light = (hour >= 6 && hour < 19) ? "day" : "night";
        label_of[trip.order_id] = period + "_" + light;
      } catch (const UnmatchedTripError&) {
        ++unmatched;
      }
    }
    manifest.note("unmatched_trips", unmatched);
    const FilteredTrajectories seg_filtered = filter_trips(matched, cfg.filter);
    trips = seg_filtered.kept;
    for (const auto& t : trips) labels.push_back(label_of.at(t.order_id));
    manifest.note("segment_rejections",
                  seg_filtered.report.counts.count(RejectReason::too_few_segments)
                      ? seg_filtered.report.counts.at(RejectReason::too_few_segments)
                      : 0);
  } else {
    trips = load_trajectories(world, out_path(cfg, cfg.trajectories.path),
                              &manifest);
    labels.assign(trips.size(), "all");
  }
  if (trips.empty()) throw ValidationError("no trips for trip-stats");

  const TripStats stats = trip_stats(trips, labels, world);
  const fs::path json_path = out_path(cfg, "trip_stats.json");
  write_file(json_path, stats.to_json() + "\n");
  manifest.output(json_path);
  const fs::path csv_path = out_path(cfg, "trip_stats.csv");
  write_file(csv_path, stats.to_csv());
  manifest.output(csv_path);
  manifest.write();
  std::cout << "trip-stats: " << trips.size() << " trips, "
            << stats.zero_distance_count << " zero-distance\n";
}

int run_command(const std::string& name, const RunConfig& cfg) {
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  try {
    if (name == "gen-world") {
      cmd_gen_world(cfg);
    } else if (name == "gen-experts") {
      cmd_gen_experts(cfg);
    } else if (name == "train") {
      cmd_train(cfg);
    } else if (name == "rollout") {
      cmd_rollout(cfg);
    } else if (name == "evaluate") {
      cmd_evaluate(cfg);
    } else if (name == "explain") {
      cmd_explain(cfg);
    } else if (name == "trip-stats") {
      cmd_trip_stats(cfg);
    } else {
      std::cerr << nlohmann::json{{"error", "unknown subcommand: " + name},
                                  {"type", "validation"}}
                       .dump()
                << "\n";
      return 1;
    }
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"type", "validation"}}.dump()
              << "\n";
    return 1;
  } catch (const ConvergenceError& e) {
    std::cerr << nlohmann::json{{"error", e.what()},
                                {"type", "non-convergence"},
                                {"residual", e.residual}}
                     .dump()
              << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"type", "runtime"}}.dump()
              << "\n";
    return 2;
  }
}

}  // namespace velopref

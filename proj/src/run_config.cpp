#include "velopref/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "velopref/hashing.hpp"
#include <json.hpp>

namespace velopref {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& prefix,
                const std::set<std::string>& allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ValidationError("unknown config key: " + prefix + key);
    }
  }
}

json parse_override_value(const std::string& text) {
  const auto parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!parsed.is_discarded()) return parsed;
  return json(text);  // bare strings need no quotes on the command line
}

void apply_override(json& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("override must look like key.path=value: " + spec);
  }
  const std::string path = spec.substr(0, eq);
  json* node = &root;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot - pos);
    if (key.empty()) throw ValidationError("empty key segment in: " + spec);
    if (dot == std::string::npos) {
      (*node)[key] = parse_override_value(spec.substr(eq + 1));
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text,
                                    const std::vector<std::string>& overrides) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError("config is not valid JSON");
  if (!j.is_object()) throw ValidationError("config root must be an object");
  for (const auto& spec : overrides) apply_override(j, spec);

  check_keys(j, "", {"seed", "threads", "output_dir", "world", "experts",
                     "trajectories", "filter", "match", "train", "rollout",
                     "explain"});

  RunConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);

  if (j.contains("world")) {
    const auto& w = j["world"];
    check_keys(w, "world.", {"source", "path", "rows", "cols",
                             "blocked_fraction", "feature_dim", "cell_size"});
    cfg.world.source = w.value("source", cfg.world.source);
    cfg.world.path = w.value("path", cfg.world.path);
    cfg.world.rows = w.value("rows", cfg.world.rows);
    cfg.world.cols = w.value("cols", cfg.world.cols);
    cfg.world.blocked_fraction = w.value("blocked_fraction", cfg.world.blocked_fraction);
    cfg.world.feature_dim = w.value("feature_dim", cfg.world.feature_dim);
    cfg.world.cell_size = w.value("cell_size", cfg.world.cell_size);
    if (cfg.world.source != "synthetic" && cfg.world.source != "file") {
      throw ValidationError("world.source must be 'synthetic' or 'file'");
    }
    if (cfg.world.source == "file" && cfg.world.path.empty()) {
      throw ValidationError("world.path required when world.source is 'file'");
    }
    if (cfg.world.rows < 1 || cfg.world.cols < 1) {
      throw ValidationError("world.rows and world.cols must be >= 1");
    }
    if (cfg.world.blocked_fraction < 0.0 || cfg.world.blocked_fraction >= 1.0) {
      throw ValidationError("world.blocked_fraction must lie in [0, 1)");
    }
  }

  if (j.contains("experts")) {
    const auto& e = j["experts"];
    check_keys(e, "experts.", {"count", "od_pairs", "od_min_manhattan",
                               "reward_offset", "reward_scale", "max_steps",
                               "output"});
    cfg.experts.count = e.value("count", cfg.experts.count);
    cfg.experts.od_pairs = e.value("od_pairs", cfg.experts.od_pairs);
    cfg.experts.od_min_manhattan =
        e.value("od_min_manhattan", cfg.experts.od_min_manhattan);
    cfg.experts.reward_offset = e.value("reward_offset", cfg.experts.reward_offset);
    cfg.experts.reward_scale = e.value("reward_scale", cfg.experts.reward_scale);
    cfg.experts.max_steps = e.value("max_steps", cfg.experts.max_steps);
    cfg.experts.output = e.value("output", cfg.experts.output);
    if (cfg.experts.count < 0) throw ValidationError("experts.count must be >= 0");
    if (cfg.experts.od_pairs < 1) throw ValidationError("experts.od_pairs must be >= 1");
  }

  if (j.contains("trajectories")) {
    const auto& t = j["trajectories"];
    check_keys(t, "trajectories.", {"source", "path", "format"});
    cfg.trajectories.source = t.value("source", cfg.trajectories.source);
    cfg.trajectories.path = t.value("path", cfg.trajectories.path);
    cfg.trajectories.format = t.value("format", cfg.trajectories.format);
    if (cfg.trajectories.source != "file" && cfg.trajectories.source != "raw") {
      throw ValidationError("trajectories.source must be 'file' or 'raw'");
    }
    if (cfg.trajectories.format != "csv" && cfg.trajectories.format != "json") {
      throw ValidationError("trajectories.format must be 'csv' or 'json'");
    }
  }

  if (j.contains("filter")) {
    const auto& f = j["filter"];
    check_keys(f, "filter.", {"min_segments", "max_speed_kmh", "min_duration_s",
                              "max_duration_s", "weekday_only", "hour_min",
                              "hour_max", "reject_same_od",
                              "coords_are_geographic"});
    cfg.filter.min_segments = f.value("min_segments", cfg.filter.min_segments);
    cfg.filter.max_speed_kmh = f.value("max_speed_kmh", cfg.filter.max_speed_kmh);
    cfg.filter.min_duration_s = f.value("min_duration_s", cfg.filter.min_duration_s);
    cfg.filter.max_duration_s = f.value("max_duration_s", cfg.filter.max_duration_s);
    cfg.filter.weekday_only = f.value("weekday_only", cfg.filter.weekday_only);
    cfg.filter.hour_min = f.value("hour_min", cfg.filter.hour_min);
    cfg.filter.hour_max = f.value("hour_max", cfg.filter.hour_max);
    cfg.filter.reject_same_od = f.value("reject_same_od", cfg.filter.reject_same_od);
    cfg.filter.coords_are_geographic =
        f.value("coords_are_geographic", cfg.filter.coords_are_geographic);
  }

  if (j.contains("match")) {
    const auto& m = j["match"];
    check_keys(m, "match.", {"sigma_m", "beta_m", "gate_sigmas"});
    cfg.match.sigma_m = m.value("sigma_m", cfg.match.sigma_m);
    cfg.match.beta_m = m.value("beta_m", cfg.match.beta_m);
    cfg.match.gate_sigmas = m.value("gate_sigmas", cfg.match.gate_sigmas);
    if (cfg.match.sigma_m <= 0 || cfg.match.beta_m <= 0) {
      throw ValidationError("match.sigma_m and match.beta_m must be positive");
    }
  }

  if (j.contains("train")) {
    const auto& t = j["train"];
    check_keys(t, "train.", {"gamma", "vi_tol", "vi_max_iters", "horizon",
                             "epochs", "learning_rate", "lambda", "width",
                             "depth", "dip_tol", "max_backtracks"});
    cfg.train.gamma = t.value("gamma", cfg.train.gamma);
    cfg.train.vi_tol = t.value("vi_tol", cfg.train.vi_tol);
    cfg.train.vi_max_iters = t.value("vi_max_iters", cfg.train.vi_max_iters);
    cfg.train.horizon = t.value("horizon", cfg.train.horizon);
    cfg.train.epochs = t.value("epochs", cfg.train.epochs);
    cfg.train.learning_rate = t.value("learning_rate", cfg.train.learning_rate);
    cfg.train.lambda = t.value("lambda", cfg.train.lambda);
    cfg.train.width = t.value("width", cfg.train.width);
    cfg.train.depth = t.value("depth", cfg.train.depth);
    cfg.train.dip_tol = t.value("dip_tol", cfg.train.dip_tol);
    cfg.train.max_backtracks = t.value("max_backtracks", cfg.train.max_backtracks);
    if (cfg.train.gamma <= 0.0 || cfg.train.gamma > 1.0) {
      throw ValidationError("train.gamma must lie in (0, 1]");
    }
    if (cfg.train.vi_tol <= 0.0) throw ValidationError("train.vi_tol must be > 0");
    if (cfg.train.epochs < 1) throw ValidationError("train.epochs must be >= 1");
    if (cfg.train.depth < 0) throw ValidationError("train.depth must be >= 0");
  }

  if (j.contains("rollout")) {
    const auto& r = j["rollout"];
    check_keys(r, "rollout.", {"mode", "od_pairs", "od_min_manhattan",
                               "max_steps", "real_source", "output",
                               "include_nonterminated_cpc"});
    cfg.rollout.mode = r.value("mode", cfg.rollout.mode);
    cfg.rollout.od_pairs = r.value("od_pairs", cfg.rollout.od_pairs);
    cfg.rollout.od_min_manhattan =
        r.value("od_min_manhattan", cfg.rollout.od_min_manhattan);
    cfg.rollout.max_steps = r.value("max_steps", cfg.rollout.max_steps);
    cfg.rollout.real_source = r.value("real_source", cfg.rollout.real_source);
    cfg.rollout.output = r.value("output", cfg.rollout.output);
    cfg.rollout.include_nonterminated_cpc = r.value(
        "include_nonterminated_cpc", cfg.rollout.include_nonterminated_cpc);
    if (cfg.rollout.mode != "greedy" && cfg.rollout.mode != "stochastic") {
      throw ValidationError("rollout.mode must be 'greedy' or 'stochastic'");
    }
    if (cfg.rollout.real_source != "planted" && cfg.rollout.real_source != "file") {
      throw ValidationError("rollout.real_source must be 'planted' or 'file'");
    }
  }

  if (j.contains("explain")) {
    const auto& e = j["explain"];
    check_keys(e, "explain.",
               {"background", "budget", "feature_groups", "local_trips"});
    cfg.explain.background = e.value("background", cfg.explain.background);
    cfg.explain.budget = e.value("budget", cfg.explain.budget);
    if (e.contains("feature_groups")) {
      cfg.explain.feature_groups =
          e["feature_groups"].get<std::vector<std::string>>();
    }
    if (e.contains("local_trips")) {
      cfg.explain.local_trips = e["local_trips"].get<std::vector<int>>();
    }
    if (cfg.explain.background < 1) {
      throw ValidationError("explain.background must be >= 1");
    }
    if (cfg.explain.budget < 1) throw ValidationError("explain.budget must be >= 1");
  }

  cfg.config_digest = fnv1a64(j.dump());
  return cfg;
}

RunConfig RunConfig::load(const std::string& path,
                          const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), overrides);
}

}  // namespace velopref

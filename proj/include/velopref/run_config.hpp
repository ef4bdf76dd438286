#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "velopref/map_match.hpp"
#include "velopref/rollout.hpp"
#include "velopref/solver.hpp"
#include "velopref/trajectory.hpp"

namespace velopref {

inline constexpr const char* kVersion = "0.2.0";

struct ValidationError : Error {
  using Error::Error;
};

struct WorldConfig {
  std::string source = "synthetic";  // synthetic | file
  std::string path;                  // file mode
  int rows = 20;
  int cols = 20;
  double blocked_fraction = 0.15;
  int feature_dim = 8;
  double cell_size = 100.0;
};

struct ExpertConfig {
  int count = 2000;
  int od_pairs = 50;
  int od_min_manhattan = 6;    // grid cells between origin and destination
  double reward_offset = -4.0; // affine map of planted rewards into costs
  double reward_scale = 1.5;
  int max_steps = 0;           // 0 -> solver default horizon
  std::string output = "experts.json";
};

struct TrajectorySourceConfig {
  std::string source = "file";  // file (trajectory JSON) | raw (GPS records)
  std::string path = "experts.json";
  std::string format = "json";  // raw mode: csv | json
};

struct RolloutCommandConfig {
  std::string mode = "greedy";       // greedy | stochastic
  int od_pairs = 200;
  int od_min_manhattan = 6;
  int max_steps = 0;
  std::string real_source = "planted";  // planted | file
  std::string output = "paired.json";
  bool include_nonterminated_cpc = false;
};

struct ExplainConfig {
  int background = 100;
  int budget = 2000;
  std::vector<std::string> feature_groups;  // optional, one per feature
  std::vector<int> local_trips;             // trip indices for local reports
};

struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = library default
  std::string output_dir = "out";
  WorldConfig world;
  ExpertConfig experts;
  TrajectorySourceConfig trajectories;
  FilterRules filter;
  MatchConfig match;
  TrainConfig train;
  RolloutCommandConfig rollout;
  ExplainConfig explain;

  std::uint64_t config_digest = 0;  // digest of the resolved JSON

  // Parses the config file, applies "k.ey=value" overrides, rejects
  // unknown keys, and validates ranges. Throws ValidationError.
  static RunConfig load(const std::string& path,
                        const std::vector<std::string>& overrides);
  static RunConfig from_json_text(const std::string& text,
                                  const std::vector<std::string>& overrides);
};

}  // namespace velopref

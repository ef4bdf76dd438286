#include "velopref/grid_world.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "velopref/rng.hpp"
#include <json.hpp>

namespace velopref {

Action opposite(Action a) {
  switch (a) {
    case Action::F: return Action::B;
    case Action::FL: return Action::BR;
    case Action::L: return Action::R;
    case Action::BL: return Action::FR;
    case Action::B: return Action::F;
    case Action::BR: return Action::FL;
    case Action::R: return Action::L;
    case Action::FR: return Action::BL;
    case Action::ST: return Action::ST;
  }
  throw Error("invalid action");
}

const char* action_name(Action a) {
  static const char* names[kNumActions] = {"F",  "FL", "L",  "BL", "B",
                                           "BR", "R",  "FR", "ST"};
  return names[static_cast<int>(a)];
}

std::optional<Action> action_from_name(const std::string& name) {
  for (int i = 0; i < kNumActions; ++i) {
    if (name == action_name(static_cast<Action>(i))) {
      return static_cast<Action>(i);
    }
  }
  return std::nullopt;
}

std::optional<Action> action_from_offset(int drow, int dcol) {
  for (int i = 0; i < kNumActions; ++i) {
    if (kActionOffset[i][0] == drow && kActionOffset[i][1] == dcol) {
      return static_cast<Action>(i);
    }
  }
  return std::nullopt;
}

World World::build(int rows, int cols, const std::vector<int>& blocked,
                   const std::vector<std::vector<double>>& features,
                   double cell_size) {
  if (rows < 1 || cols < 1) throw Error("world dimensions must be >= 1");
  if (cell_size <= 0) throw Error("cell_size must be positive");

  World w;
  w.rows_ = rows;
  w.cols_ = cols;
  w.cell_size_ = cell_size;
  w.state_of_cell_.assign(static_cast<std::size_t>(rows) * cols, 0);

  for (int cell : blocked) {
    if (cell < 0 || cell >= rows * cols) {
      throw Error("blocked cell index out of bounds: " +
                           std::to_string(cell));
    }
    w.state_of_cell_[cell] = -1;
  }

  for (int cell = 0; cell < rows * cols; ++cell) {
    if (w.state_of_cell_[cell] == 0) {
      w.state_of_cell_[cell] = static_cast<std::int32_t>(w.cell_of_state_.size());
      w.cell_of_state_.push_back(cell);
    }
  }
  if (w.cell_of_state_.empty()) throw Error("world has zero passable cells");

  const int n = w.num_states();
  if (static_cast<int>(features.size()) != n) {
    throw Error("feature table must cover all passable cells: expected " +
                         std::to_string(n) + " rows, got " +
                         std::to_string(features.size()));
  }
  w.feature_dim_ = static_cast<int>(features.front().size());
  if (w.feature_dim_ < 1) throw Error("feature dimension must be >= 1");
  w.features_.reserve(static_cast<std::size_t>(n) * w.feature_dim_);
  for (const auto& row : features) {
    if (static_cast<int>(row.size()) != w.feature_dim_) {
      throw Error("feature dimension mismatch");
    }
    for (double v : row) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw Error("feature value outside [0,1]");
      }
      w.features_.push_back(v);
    }
  }

  w.adjacency_.assign(static_cast<std::size_t>(n) * kNumActions, -1);
  for (int s = 0; s < n; ++s) {
    const int cell = w.cell_of_state_[s];
    const int r = cell / cols, c = cell % cols;
    for (int a = 0; a < kNumActions; ++a) {
      const int nr = r + kActionOffset[a][0];
      const int nc = c + kActionOffset[a][1];
      if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
      const int ns = w.state_of_cell_[nr * cols + nc];
      if (ns >= 0) w.adjacency_[static_cast<std::size_t>(s) * kNumActions + a] = ns;
    }
  }
  return w;
}

bool World::passable_rc(int row, int col) const {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) return false;
  return state_of_cell_[row * cols_ + col] >= 0;
}

int World::state_of_cell(int cell) const {
  if (cell < 0 || cell >= rows_ * cols_) {
    throw Error("cell index out of bounds: " + std::to_string(cell));
  }
  return state_of_cell_[cell];
}

std::vector<Action> World::local_actions(int state) const {
  if (state < 0 || state >= num_states()) throw Error("state out of bounds");
  std::vector<Action> out;
  out.reserve(kNumActions);
  for (int a = 0; a < kNumActions; ++a) {
    if (next_state(state, static_cast<Action>(a)) >= 0) {
      out.push_back(static_cast<Action>(a));
    }
  }
  return out;
}

int World::step(int state, Action a) const {
  if (state < 0 || state >= num_states()) throw Error("state out of bounds");
  const int ns = next_state(state, a);
  if (ns < 0) {
    throw Error(std::string("invalid action ") + action_name(a) +
                         " at state " + std::to_string(state));
  }
  return ns;
}

double World::manhattan_m(int state_a, int state_b) const {
  const int dr = std::abs(row_of_state(state_a) - row_of_state(state_b));
  const int dc = std::abs(col_of_state(state_a) - col_of_state(state_b));
  return (dr + dc) * cell_size_;
}

bool World::connected() const {
  const int n = num_states();
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop();
    for (int a = 0; a < kNumActions; ++a) {
      const int ns = next_state(s, static_cast<Action>(a));
      if (ns >= 0 && !seen[ns]) {
        seen[ns] = 1;
        ++reached;
        frontier.push(ns);
      }
    }
  }
  return reached == n;
}

std::vector<int> World::blocked_cells() const {
  std::vector<int> out;
  for (int cell = 0; cell < num_cells(); ++cell) {
    if (state_of_cell_[cell] < 0) out.push_back(cell);
  }
  return out;
}

std::string World::to_json() const {
  nlohmann::json j;
  j["rows"] = rows_;
  j["cols"] = cols_;
  j["cell_size"] = cell_size_;
  j["blocked"] = blocked_cells();
  auto features = nlohmann::json::array();
  for (int s = 0; s < num_states(); ++s) {
    features.push_back(std::vector<double>(
        state_features(s), state_features(s) + feature_dim_));
  }
  j["features"] = std::move(features);
  if (geo_origin) j["geo_origin"] = *geo_origin;
  return j.dump(2);
}

World World::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  std::vector<int> blocked = j.value("blocked", std::vector<int>{});
  std::vector<std::vector<double>> features =
      j.at("features").get<std::vector<std::vector<double>>>();
  World w = build(j.at("rows").get<int>(), j.at("cols").get<int>(), blocked,
                  features, j.value("cell_size", 100.0));
  if (j.contains("geo_origin")) {
    auto origin = j["geo_origin"].get<std::vector<double>>();
    if (origin.size() != 2) throw Error("geo_origin must be [lon, lat]");
    w.geo_origin = std::array<double, 2>{origin[0], origin[1]};
  }
  return w;
}

std::vector<std::vector<double>> normalize_features(
    const std::vector<std::vector<double>>& table) {
  if (table.empty()) return {};
  const std::size_t dim = table.front().size();
  for (const auto& row : table) {
    if (row.size() != dim) throw Error("ragged feature table");
    for (double v : row) {
      if (!std::isfinite(v)) throw Error("non-finite feature value");
    }
  }
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& row : table) {
    for (std::size_t k = 0; k < dim; ++k) {
      lo[k] = std::min(lo[k], row[k]);
      hi[k] = std::max(hi[k], row[k]);
    }
  }
  std::vector<std::vector<double>> out(table.size(), std::vector<double>(dim));
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      const double span = hi[k] - lo[k];
      out[i][k] = span > 0.0 ? (table[i][k] - lo[k]) / span : 0.0;
    }
  }
  return out;
}

SyntheticWorld generate_synthetic_world(const SynthConfig& config) {
  if (config.blocked_fraction < 0.0 || config.blocked_fraction >= 1.0) {
    throw Error("blocked_fraction must lie in [0, 1)");
  }
  if (config.feature_dim < 1) throw Error("feature_dim must be >= 1");

  const int cells = config.rows * config.cols;
  const int target_blocked =
      static_cast<int>(std::floor(config.blocked_fraction * cells));

  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(attempt)));

    // Sample blocked cells without replacement (partial Fisher-Yates).
    std::vector<int> perm(cells);
    for (int i = 0; i < cells; ++i) perm[i] = i;
    std::vector<int> blocked;
    blocked.reserve(target_blocked);
    for (int i = 0; i < target_blocked && i < cells - 1; ++i) {
      const int j = i + static_cast<int>(rng.uniform_int(cells - i));
      std::swap(perm[i], perm[j]);
      blocked.push_back(perm[i]);
    }
    std::sort(blocked.begin(), blocked.end());

    const int n_states = cells - static_cast<int>(blocked.size());
    std::vector<std::vector<double>> features(
        n_states, std::vector<double>(config.feature_dim));
    for (auto& row : features) {
      for (auto& v : row) v = rng.uniform();
    }

    World world = World::build(config.rows, config.cols, blocked, features);
    if (!world.connected()) continue;

    std::vector<double> weights = config.planted_weights;
    if (weights.empty()) {
      weights.resize(config.feature_dim);
      for (auto& v : weights) v = rng.uniform(-1.0, 1.0);
    } else if (static_cast<int>(weights.size()) != config.feature_dim) {
      throw Error("planted_weights dimension mismatch");
    }

    std::vector<double> raw(n_states);
    for (int s = 0; s < n_states; ++s) {
      double dot = 0.0;
      const double* x = world.state_features(s);
      for (int k = 0; k < config.feature_dim; ++k) dot += weights[k] * x[k];
      raw[s] = dot;
    }
    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double span = *hi_it - *lo_it;
    std::vector<double> planted(n_states, 0.0);
    if (span > 0.0) {
      for (int s = 0; s < n_states; ++s) planted[s] = (raw[s] - *lo_it) / span;
    }
    return SyntheticWorld{std::move(world), std::move(weights), std::move(planted)};
  }
  throw Error("could not generate a connected world within retry budget");
}

}  // namespace velopref

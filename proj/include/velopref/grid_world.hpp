#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace velopref {

// The nine movement directions on the 8-connected grid, plus stay.
// Convention: F decreases the row index (north/up), R increases the
// column index (east/right); diagonals compose the two.
enum class Action : int {
  F = 0,
  FL = 1,
  L = 2,
  BL = 3,
  B = 4,
  BR = 5,
  R = 6,
  FR = 7,
  ST = 8,
};

inline constexpr int kNumActions = 9;

// (row, col) offset of each action, indexed by Action value.
inline constexpr std::array<std::array<int, 2>, kNumActions> kActionOffset = {{
    {-1, 0},   // F
    {-1, -1},  // FL
    {0, -1},   // L
    {1, -1},   // BL
    {1, 0},    // B
    {1, 1},    // BR
    {0, 1},    // R
    {-1, 1},   // FR
    {0, 0},    // ST
}};

Action opposite(Action a);
const char* action_name(Action a);
std::optional<Action> action_from_name(const std::string& name);

// Maps a (drow, dcol) offset in {-1,0,1}^2 back to the action, or nullopt
// if the offset is not a unit grid move.
std::optional<Action> action_from_offset(int drow, int dcol);

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Grid-constrained road network. States are passable cells, compactly
// indexed; `adjacency` holds, per state and action, the successor state
// id or -1 when the move leaves the grid or enters a blocked cell.
// Immutable after construction; safe to share across threads.
class World {
 public:
  // `blocked` lists raw cell indices (row * cols + col). `features` has one
  // row of dimension `feature_dim` per passable cell, ordered by cell index,
  // every entry in [0, 1].
  static World build(int rows, int cols, const std::vector<int>& blocked,
                     const std::vector<std::vector<double>>& features,
                     double cell_size = 100.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_size() const { return cell_size_; }
  int num_states() const { return static_cast<int>(cell_of_state_.size()); }
  int num_cells() const { return rows_ * cols_; }
  int feature_dim() const { return feature_dim_; }

  bool passable_cell(int cell) const { return state_of_cell_[cell] >= 0; }
  bool passable_rc(int row, int col) const;
  int state_of_cell(int cell) const;   // -1 if blocked
  int cell_of_state(int state) const { return cell_of_state_[state]; }
  int row_of_state(int state) const { return cell_of_state_[state] / cols_; }
  int col_of_state(int state) const { return cell_of_state_[state] % cols_; }

  // Successor state for (state, action), or -1 when the action is invalid.
  int next_state(int state, Action a) const {
    return adjacency_[static_cast<std::size_t>(state) * kNumActions +
                      static_cast<int>(a)];
  }

  // The valid subset of the nine global actions at `state`. ST is always
  // a member for passable states.
  std::vector<Action> local_actions(int state) const;

  // Deterministic transition. Throws if the action is invalid at `state`.
  int step(int state, Action a) const;

  // Feature vector of a state (length feature_dim).
  const double* state_features(int state) const {
    return features_.data() + static_cast<std::size_t>(state) * feature_dim_;
  }
  const std::vector<double>& feature_matrix() const { return features_; }

  // Grid L1 distance between two states, in meters.
  double manhattan_m(int state_a, int state_b) const;

  // True when every passable cell can reach every other over the
  // 8-neighbor passable graph.
  bool connected() const;

  std::vector<int> blocked_cells() const;

  // Optional georeference: longitude/latitude of the top-left grid corner.
  // When absent, trajectory point coordinates are treated as planar meters.
  std::optional<std::array<double, 2>> geo_origin;

  std::string to_json() const;
  static World from_json(const std::string& json_text);

 private:
  World() = default;

  int rows_ = 0;
  int cols_ = 0;
  double cell_size_ = 100.0;
  int feature_dim_ = 0;
  std::vector<std::int32_t> state_of_cell_;
  std::vector<std::int32_t> cell_of_state_;
  std::vector<std::int32_t> adjacency_;  // num_states x kNumActions
  std::vector<double> features_;         // num_states x feature_dim
};

// Per-column min-max scaling to [0, 1]; constant columns map to 0.
// `table` is row-major, one row per entity. Throws on non-finite input.
std::vector<std::vector<double>> normalize_features(
    const std::vector<std::vector<double>>& table);

struct SynthConfig {
  int rows = 20;
  int cols = 20;
  double blocked_fraction = 0.15;
  int feature_dim = 8;
  std::vector<double> planted_weights;  // empty -> drawn from seed
  std::uint64_t seed = 1;
  int max_retries = 200;
};

struct SyntheticWorld {
  World world;
  std::vector<double> planted_weights;
  // Linear reward per state, min-max normalized over states ([0,1]; all
  // zero when the raw values are constant).
  std::vector<double> planted_rewards;
};

// Deterministically generates a connected random world with uniform [0,1]
// features and a planted linear reward. Retries with derived seeds until
// the passable region is connected; throws after config.max_retries.
SyntheticWorld generate_synthetic_world(const SynthConfig& config);

}  // namespace velopref

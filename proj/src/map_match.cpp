#include "velopref/map_match.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace velopref {

namespace {

constexpr double kMetersPerDegLat = 110540.0;
constexpr double kMetersPerDegLonEq = 111320.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double emission_logp(const GpsPoint& p, int cell, const World& world,
                     const MatchConfig& cfg) {
  const auto pos = project_point(p, world);
  const auto center = cell_center(cell, world);
  const double d = std::hypot(pos[0] - center[0], pos[1] - center[1]);
  return -0.5 * d * d / (cfg.sigma_m * cfg.sigma_m);
}

// Network gap between equal/adjacent cells; -1 when not connected by one move.
double network_gap(int cell_a, int cell_b, const World& world) {
  if (cell_a == cell_b) return 0.0;
  const int sa = world.state_of_cell(cell_a);
  const int sb = world.state_of_cell(cell_b);
  if (sa < 0 || sb < 0) return -1.0;
  const int dr = cell_b / world.cols() - cell_a / world.cols();
  const int dc = cell_b % world.cols() - cell_a % world.cols();
  const auto action = action_from_offset(dr, dc);
  if (!action || world.next_state(sa, *action) != sb) return -1.0;
  const bool diagonal = dr != 0 && dc != 0;
  return world.cell_size() * (diagonal ? std::numbers::sqrt2 : 1.0);
}

double transition_logp(const GpsPoint& from_p, const GpsPoint& to_p,
                       int from_cell, int to_cell, const World& world,
                       const MatchConfig& cfg) {
  const double gap = network_gap(from_cell, to_cell, world);
  if (gap < 0.0) return kNegInf;
  const auto a = project_point(from_p, world);
  const auto b = project_point(to_p, world);
  const double point_gap = std::hypot(a[0] - b[0], a[1] - b[1]);
  return -std::abs(point_gap - gap) / cfg.beta_m;
}

}  // namespace

std::array<double, 2> project_point(const GpsPoint& p, const World& world) {
  if (!world.geo_origin) return {p.lon, p.lat};
  const double lon0 = (*world.geo_origin)[0];
  const double lat0 = (*world.geo_origin)[1];
  const double x = (p.lon - lon0) * kMetersPerDegLonEq *
                   std::cos(lat0 * M_PI / 180.0);
  // Row index grows southward from the origin corner.
  const double y = (lat0 - p.lat) * kMetersPerDegLat;
  return {x, y};
}

std::array<double, 2> cell_center(int cell, const World& world) {
  const int r = cell / world.cols();
  const int c = cell % world.cols();
  return {(c + 0.5) * world.cell_size(), (r + 0.5) * world.cell_size()};
}

std::vector<int> match_candidates(const GpsPoint& point, const World& world,
                                  const MatchConfig& cfg) {
  const double gate = cfg.gate_sigmas * cfg.sigma_m;
  const auto pos = project_point(point, world);
  std::vector<int> out;
  for (int s = 0; s < world.num_states(); ++s) {
    const int cell = world.cell_of_state(s);
    const auto center = cell_center(cell, world);
    if (std::hypot(pos[0] - center[0], pos[1] - center[1]) <= gate) {
      out.push_back(cell);
    }
  }
  // cell_of_state is ordered by cell index, so `out` is already sorted.
  return out;
}

std::vector<int> hmm_map_match(const std::vector<GpsPoint>& points,
                               const World& world, const MatchConfig& cfg) {
  if (points.size() < 2) throw Error("map matching needs at least 2 points");
  if (world.num_states() == 0) throw Error("empty world");

  const std::size_t n = points.size();
  std::vector<std::vector<int>> candidates(n);
  for (std::size_t t = 0; t < n; ++t) {
    candidates[t] = match_candidates(points[t], world, cfg);
    if (candidates[t].empty()) {
      throw UnmatchedTripError("no candidate cell within gate of point " +
                               std::to_string(t));
    }
  }

  // Viterbi. Ties keep the earliest candidate in cell-index order so the
  // result is deterministic.
  std::vector<std::vector<double>> score(n);
  std::vector<std::vector<int>> parent(n);
  score[0].resize(candidates[0].size());
  parent[0].assign(candidates[0].size(), -1);
  for (std::size_t i = 0; i < candidates[0].size(); ++i) {
    score[0][i] = emission_logp(points[0], candidates[0][i], world, cfg);
  }
  for (std::size_t t = 1; t < n; ++t) {
    score[t].assign(candidates[t].size(), kNegInf);
    parent[t].assign(candidates[t].size(), -1);
    for (std::size_t j = 0; j < candidates[t].size(); ++j) {
      const double emit = emission_logp(points[t], candidates[t][j], world, cfg);
      double best = kNegInf;
      int best_i = -1;
      for (std::size_t i = 0; i < candidates[t - 1].size(); ++i) {
        if (score[t - 1][i] == kNegInf) continue;
        const double trans =
            transition_logp(points[t - 1], points[t], candidates[t - 1][i],
                            candidates[t][j], world, cfg);
        if (trans == kNegInf) continue;
        const double total = score[t - 1][i] + trans;
        if (total > best) {
          best = total;
          best_i = static_cast<int>(i);
        }
      }
      if (best_i >= 0) {
        score[t][j] = best + emit;
        parent[t][j] = best_i;
      }
    }
  }

  double best = kNegInf;
  int best_j = -1;
  for (std::size_t j = 0; j < candidates[n - 1].size(); ++j) {
    if (score[n - 1][j] > best) {
      best = score[n - 1][j];
      best_j = static_cast<int>(j);
    }
  }
  if (best_j < 0) {
    throw UnmatchedTripError(
        "no adjacency-consistent cell sequence spans the trip");
  }

  std::vector<int> cells(n);
  int j = best_j;
  for (std::size_t t = n; t-- > 0;) {
    cells[t] = candidates[t][j];
    j = parent[t][j];
  }
  return cells;
}

double match_sequence_score(const std::vector<GpsPoint>& points,
                            const std::vector<int>& cells, const World& world,
                            const MatchConfig& cfg) {
  if (points.size() != cells.size()) throw Error("sequence length mismatch");
  double total = emission_logp(points[0], cells[0], world, cfg);
  for (std::size_t t = 1; t < points.size(); ++t) {
    total += transition_logp(points[t - 1], points[t], cells[t - 1], cells[t],
                             world, cfg);
    total += emission_logp(points[t], cells[t], world, cfg);
  }
  return total;
}

}  // namespace velopref

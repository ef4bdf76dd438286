#pragma once

#include <vector>

#include "velopref/grid_world.hpp"
#include "velopref/trajectory.hpp"

namespace velopref {

struct UnmatchedTripError : Error {
  using Error::Error;
};

struct MatchConfig {
  double sigma_m = 20.0;   // GPS noise std-dev for the Gaussian emission
  double beta_m = 20.0;    // scale of the gap-mismatch transition penalty
  double gate_sigmas = 3.0;  // candidate gate radius, in sigmas
};

// Planar position of a GPS point in grid meters. When the world carries a
// geo_origin, lon/lat are projected equirectangularly around it; otherwise
// coordinates are taken as planar meters with lon = x (east, along
// columns) and lat = y (along rows).
std::array<double, 2> project_point(const GpsPoint& p, const World& world);

// Grid-meter center of a cell: ((col+0.5)*cell, (row+0.5)*cell).
std::array<double, 2> cell_center(int cell, const World& world);

// Viterbi decoding over per-point candidate cells. Emission is Gaussian in
// the point-to-center distance; transitions are allowed between equal or
// 8-adjacent cells and penalize |point gap - network gap| exponentially
// (Newson-Krumm style). Returns the optimal cell sequence; consecutive
// output cells are adjacent or equal by construction. Throws
// UnmatchedTripError when some point has no candidate inside the gate.
std::vector<int> hmm_map_match(const std::vector<GpsPoint>& points,
                               const World& world,
                               const MatchConfig& config = {});

// Log-score of one candidate cell sequence under the same model; exposed
// so tests can cross-check against exhaustive enumeration.
double match_sequence_score(const std::vector<GpsPoint>& points,
                            const std::vector<int>& cells, const World& world,
                            const MatchConfig& config = {});

// Candidate cells (sorted by cell index) within the gate of one point.
std::vector<int> match_candidates(const GpsPoint& point, const World& world,
                                  const MatchConfig& config = {});

}  // namespace velopref

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "velopref/grid_world.hpp"

namespace velopref {

struct GpsPoint {
  double lon = 0.0;
  double lat = 0.0;
  std::int64_t t_ms = 0;
};

// One raw trip record: id, start/end timestamps (epoch seconds, local wall
// clock), and the GPS point sequence.
struct RawTrip {
  std::string order_id;
  std::int64_t start_time = 0;
  std::int64_t end_time = 0;
  std::vector<GpsPoint> points;
};

struct ParseIssue {
  std::size_t line = 0;  // 1-based input line (or record index for JSON)
  std::string message;
};

struct ParsedTrips {
  std::vector<RawTrip> trips;
  std::vector<ParseIssue> issues;
};

enum class TripFormat { csv, json };

// CSV columns: order_id, start_time, end_time, points. The points field
// encodes "lon,lat;epoch_ms#lon,lat;epoch_ms#...". The JSON variant is an
// array of objects with the same fields and points as [lon, lat, epoch_ms]
// triples. Malformed records land in `issues` with their line numbers.
ParsedTrips parse_trips(const std::string& path, TripFormat format);

struct Step {
  int state = 0;
  Action action = Action::ST;
};

// A demonstrated or synthesized path: `steps` hold the decision states and
// the actions taken there; the destination appears only as the result of
// the final action. segment_count is the number of distinct cells visited
// (destination included).
struct Trajectory {
  int origin = 0;
  int destination = 0;
  std::vector<Step> steps;
  int segment_count = 0;
  bool terminated = true;  // false when a rollout hit its step cap
  std::string order_id;    // optional provenance

  // Full visited state sequence: step states plus the destination.
  std::vector<int> state_sequence() const;
};

// Converts a matched cell sequence into a Trajectory. Consecutive equal
// cells become ST steps; non-adjacent consecutive cells are an error.
Trajectory to_trajectory(const std::vector<int>& cells, const World& world);

std::string trajectory_to_json(const Trajectory& traj, const World& world);
Trajectory trajectory_from_json(const std::string& json_text, const World& world);
std::string trajectories_to_json(const std::vector<Trajectory>& trajs,
                                 const World& world);
std::vector<Trajectory> trajectories_from_json(const std::string& json_text,
                                               const World& world);

struct FilterRules {
  int min_segments = 6;          // keep trips with segment_count >= this
  double max_speed_kmh = 30.0;   // implied mean speed ceiling
  double min_duration_s = 60.0;
  double max_duration_s = 7200.0;
  bool weekday_only = false;
  int hour_min = 0;   // keep trips starting in [hour_min, hour_max)
  int hour_max = 24;
  bool reject_same_od = true;
  bool coords_are_geographic = true;  // false: lon/lat are planar meters
};

enum class RejectReason {
  too_few_segments,
  over_speed,
  too_short_duration,
  too_long_duration,
  not_weekday,
  outside_time_window,
  same_od,
};

const char* reject_reason_name(RejectReason r);

struct RejectionReport {
  std::map<RejectReason, std::size_t> counts;
  std::size_t total_in = 0;
  std::size_t total_kept = 0;
};

struct FilteredRaw {
  std::vector<RawTrip> kept;
  RejectionReport report;
};
struct FilteredTrajectories {
  std::vector<Trajectory> kept;
  RejectionReport report;
};

// Timing / speed / OD rules; applies to raw trips before map matching.
FilteredRaw filter_trips(const std::vector<RawTrip>& trips,
                         const FilterRules& rules);
// Segment-count rule; applies after conversion to trajectories.
FilteredTrajectories filter_trips(const std::vector<Trajectory>& trajs,
                                  const FilterRules& rules);

// Trajectories padded to a common length. Masked-out entries carry
// all-zero state/action slots; `mask` is true exactly for real steps.
struct TrajectoryBatch {
  std::vector<Trajectory> trajectories;
  int max_len = 0;
  std::vector<std::int32_t> padded_states;   // n x max_len, 0 where masked
  std::vector<std::int32_t> padded_actions;  // n x max_len, 0 where masked
  std::vector<std::uint8_t> mask;            // n x max_len

  int size() const { return static_cast<int>(trajectories.size()); }
  bool masked(int trip, int t) const {
    return mask[static_cast<std::size_t>(trip) * max_len + t] == 0;
  }
};

TrajectoryBatch pad_and_mask(const std::vector<Trajectory>& trajs);

struct TripStats {
  std::vector<double> manhattan_m;       // per trip
  std::vector<double> log10_distance;    // NaN where distance is zero
  std::vector<std::string> labels;       // per trip
  std::map<std::string, double> label_mean;      // of log10 distance
  std::map<std::string, double> label_variance;  // population variance
  std::map<int, std::size_t> decision_histogram;  // segment_count -> trips
  std::size_t zero_distance_count = 0;   // excluded from log statistics

  std::string to_json() const;
  std::string to_csv() const;
};

// Manhattan OD distance in meters per trip, base-10 log statistics
// aggregated by period label, and the decision-frequency histogram over
// segment counts. Zero-distance trips are excluded from the log stats
// (and counted), but still appear in the histogram.
TripStats trip_stats(const std::vector<Trajectory>& trajs,
                     const std::vector<std::string>& labels,
                     const World& world);

// Calendar helpers for period labels (epoch seconds, local wall clock).
bool is_weekday(std::int64_t epoch_s);
int hour_of_day(std::int64_t epoch_s);
std::optional<std::int64_t> parse_datetime(const std::string& text);

}  // namespace velopref

#include "velopref/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace velopref {

namespace {

constexpr double kMetersPerDegLat = 110540.0;
constexpr double kMetersPerDegLonEq = 111320.0;

double point_distance_m(const GpsPoint& a, const GpsPoint& b, bool geographic) {
  if (!geographic) return std::hypot(a.lon - b.lon, a.lat - b.lat);
  const double lat0 = 0.5 * (a.lat + b.lat) * M_PI / 180.0;
  const double dx = (a.lon - b.lon) * kMetersPerDegLonEq * std::cos(lat0);
  const double dy = (a.lat - b.lat) * kMetersPerDegLat;
  return std::hypot(dx, dy);
}

// "lon,lat;epoch_ms#lon,lat;epoch_ms#..." per the trip-record encoding.
bool parse_points_field(const std::string& field, std::vector<GpsPoint>* out,
                        std::string* error) {
  out->clear();
  std::size_t pos = 0;
  while (pos < field.size()) {
    std::size_t end = field.find('#', pos);
    if (end == std::string::npos) end = field.size();
    const std::string entry = field.substr(pos, end - pos);
    pos = end + 1;
    if (entry.empty()) continue;  // tolerate trailing '#'
    GpsPoint p;
    char trailing;
    if (std::sscanf(entry.c_str(), "%lf,%lf;%lld%c", &p.lon, &p.lat,
                    reinterpret_cast<long long*>(&p.t_ms), &trailing) != 3) {
      *error = "malformed point entry '" + entry + "'";
      return false;
    }
    out->push_back(p);
  }
  return true;
}

// Splits one CSV line, honoring double quotes around fields.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

bool validate_trip(RawTrip& trip, std::string* error) {
  if (trip.points.size() < 2) {
    *error = "too few points";
    return false;
  }
  for (std::size_t i = 1; i < trip.points.size(); ++i) {
    if (trip.points[i].t_ms < trip.points[i - 1].t_ms) {
      *error = "points not time-ordered";
      return false;
    }
  }
  return true;
}

}  // namespace

std::optional<std::int64_t> parse_datetime(const std::string& text) {
  int y, mo, d, h, mi;
  double sec;
  if (std::sscanf(text.c_str(), "%d-%d-%d %d:%d:%lf", &y, &mo, &d, &h, &mi,
                  &sec) != 6) {
    return std::nullopt;
  }
  // Days from civil date (Howard Hinnant's algorithm).
  const int yy = y - (mo <= 2);
  const int era = (yy >= 0 ? yy : yy - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(yy - era * 400);
  const unsigned doy = (153 * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  const std::int64_t days = era * 146097LL + static_cast<int>(doe) - 719468;
  return days * 86400 + h * 3600 + mi * 60 + static_cast<std::int64_t>(sec);
}

bool is_weekday(std::int64_t epoch_s) {
  std::int64_t days = epoch_s / 86400;
  if (epoch_s < 0 && epoch_s % 86400 != 0) --days;
  const int dow = static_cast<int>(((days % 7) + 7 + 3) % 7);  // Mon = 0
  return dow < 5;
}

int hour_of_day(std::int64_t epoch_s) {
  std::int64_t rem = epoch_s % 86400;
  if (rem < 0) rem += 86400;
  return static_cast<int>(rem / 3600);
}

ParsedTrips parse_trips(const std::string& path, TripFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trip file: " + path);
  ParsedTrips out;

  if (format == TripFormat::csv) {
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (!header_seen) {
        header_seen = true;  // first non-empty line is the header
        continue;
      }
      const auto fields = split_csv_line(line);
      if (fields.size() != 4) {
        out.issues.push_back({lineno, "expected 4 fields, got " +
                                          std::to_string(fields.size())});
        continue;
      }
      RawTrip trip;
      trip.order_id = fields[0];
      const auto start = parse_datetime(fields[1]);
      const auto end = parse_datetime(fields[2]);
      if (!start || !end) {
        out.issues.push_back({lineno, "unparseable timestamp"});
        continue;
      }
      trip.start_time = *start;
      trip.end_time = *end;
      std::string err;
      if (!parse_points_field(fields[3], &trip.points, &err) ||
          !validate_trip(trip, &err)) {
        out.issues.push_back({lineno, err});
        continue;
      }
      out.trips.push_back(std::move(trip));
    }
  } else {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("trip JSON parse failure: ") + e.what());
    }
    if (!j.is_array()) throw Error("trip JSON must be an array of records");
    std::size_t index = 0;
    for (const auto& rec : j) {
      ++index;
      try {
        RawTrip trip;
        trip.order_id = rec.at("order_id").is_string()
                            ? rec.at("order_id").get<std::string>()
                            : std::to_string(rec.at("order_id").get<long long>());
        if (rec.at("start_time").is_string()) {
          const auto t = parse_datetime(rec.at("start_time").get<std::string>());
          if (!t) throw Error("unparseable timestamp");
          trip.start_time = *t;
          trip.end_time = *parse_datetime(rec.at("end_time").get<std::string>());
        } else {
          trip.start_time = rec.at("start_time").get<std::int64_t>();
          trip.end_time = rec.at("end_time").get<std::int64_t>();
        }
        for (const auto& p : rec.at("points")) {
          trip.points.push_back(
              {p.at(0).get<double>(), p.at(1).get<double>(),
               p.size() > 2 ? p.at(2).get<std::int64_t>() : 0});
        }
        std::string err;
        if (!validate_trip(trip, &err)) {
          out.issues.push_back({index, err});
          continue;
        }
        out.trips.push_back(std::move(trip));
      } catch (const std::exception& e) {
        out.issues.push_back({index, e.what()});
      }
    }
  }
  return out;
}

std::vector<int> Trajectory::state_sequence() const {
  std::vector<int> seq;
  seq.reserve(steps.size() + 1);
  for (const auto& st : steps) seq.push_back(st.state);
  seq.push_back(destination);
  return seq;
}

Trajectory to_trajectory(const std::vector<int>& cells, const World& world) {
  if (cells.empty()) throw Error("empty cell sequence");
  Trajectory traj;
  std::set<int> distinct;
  int prev = world.state_of_cell(cells.front());
  if (prev < 0) throw Error("cell sequence starts on a blocked cell");
  traj.origin = prev;
  distinct.insert(cells.front());
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const int state = world.state_of_cell(cells[i]);
    if (state < 0) throw Error("cell sequence enters a blocked cell");
    const int dr = world.row_of_state(state) - world.row_of_state(prev);
    const int dc = world.col_of_state(state) - world.col_of_state(prev);
    const auto action = action_from_offset(dr, dc);
    if (!action) {
      throw Error("non-adjacent consecutive cells: " +
                  std::to_string(cells[i - 1]) + " -> " +
                  std::to_string(cells[i]));
    }
    traj.steps.push_back({prev, *action});
    distinct.insert(cells[i]);
    prev = state;
  }
  traj.destination = prev;
  traj.segment_count = static_cast<int>(distinct.size());
  return traj;
}

namespace {

nlohmann::json trajectory_json_obj(const Trajectory& traj, const World& world) {
  nlohmann::json j;
  j["od"] = {world.cell_of_state(traj.origin), world.cell_of_state(traj.destination)};
  std::vector<int> cells;
  cells.reserve(traj.steps.size() + 1);
  for (const auto& st : traj.steps) cells.push_back(world.cell_of_state(st.state));
  cells.push_back(world.cell_of_state(traj.destination));
  j["cells"] = std::move(cells);
  auto actions = nlohmann::json::array();
  for (const auto& st : traj.steps) actions.push_back(action_name(st.action));
  j["actions"] = std::move(actions);
  j["terminated"] = traj.terminated;
  if (!traj.order_id.empty()) j["order_id"] = traj.order_id;
  return j;
}

Trajectory trajectory_from_obj(const nlohmann::json& j, const World& world) {
  const auto cells = j.at("cells").get<std::vector<int>>();
  Trajectory traj = to_trajectory(cells, world);
  traj.terminated = j.value("terminated", true);
  traj.order_id = j.value("order_id", std::string{});
  const auto actions = j.at("actions").get<std::vector<std::string>>();
  if (actions.size() != traj.steps.size()) {
    throw Error("trajectory action list length mismatch");
  }
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const auto a = action_from_name(actions[i]);
    if (!a || *a != traj.steps[i].action) {
      throw Error("trajectory action list inconsistent with cell sequence");
    }
  }
  return traj;
}

}  // namespace

std::string trajectory_to_json(const Trajectory& traj, const World& world) {
  return trajectory_json_obj(traj, world).dump();
}

Trajectory trajectory_from_json(const std::string& json_text, const World& world) {
  return trajectory_from_obj(nlohmann::json::parse(json_text), world);
}

std::string trajectories_to_json(const std::vector<Trajectory>& trajs,
                                 const World& world) {
  auto arr = nlohmann::json::array();
  for (const auto& t : trajs) arr.push_back(trajectory_json_obj(t, world));
  return arr.dump(1);
}

std::vector<Trajectory> trajectories_from_json(const std::string& json_text,
                                               const World& world) {
  const auto arr = nlohmann::json::parse(json_text);
  if (!arr.is_array()) throw Error("trajectory JSON must be an array");
  std::vector<Trajectory> out;
  out.reserve(arr.size());
  for (const auto& j : arr) out.push_back(trajectory_from_obj(j, world));
  return out;
}

const char* reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::too_few_segments: return "too_few_segments";
    case RejectReason::over_speed: return "over_speed";
    case RejectReason::too_short_duration: return "too_short_duration";
    case RejectReason::too_long_duration: return "too_long_duration";
    case RejectReason::not_weekday: return "not_weekday";
    case RejectReason::outside_time_window: return "outside_time_window";
    case RejectReason::same_od: return "same_od";
  }
  return "unknown";
}

FilteredRaw filter_trips(const std::vector<RawTrip>& trips,
                         const FilterRules& rules) {
  FilteredRaw out;
  out.report.total_in = trips.size();
  for (const auto& trip : trips) {
    std::optional<RejectReason> reason;
    const double duration = static_cast<double>(trip.end_time - trip.start_time);
    if (duration < rules.min_duration_s) {
      reason = RejectReason::too_short_duration;
    } else if (duration > rules.max_duration_s) {
      reason = RejectReason::too_long_duration;
    } else if (rules.weekday_only && !is_weekday(trip.start_time)) {
      reason = RejectReason::not_weekday;
    } else if (hour_of_day(trip.start_time) < rules.hour_min ||
               hour_of_day(trip.start_time) >= rules.hour_max) {
      reason = RejectReason::outside_time_window;
    } else {
      double path_m = 0.0;
      for (std::size_t i = 1; i < trip.points.size(); ++i) {
        path_m += point_distance_m(trip.points[i - 1], trip.points[i],
                                   rules.coords_are_geographic);
      }
      const double speed_kmh = duration > 0 ? path_m / duration * 3.6 : 0.0;
      if (speed_kmh > rules.max_speed_kmh) {
        reason = RejectReason::over_speed;
      } else if (rules.reject_same_od &&
                 point_distance_m(trip.points.front(), trip.points.back(),
                                  rules.coords_are_geographic) < 1.0) {
        reason = RejectReason::same_od;
      }
    }
    if (reason) {
      ++out.report.counts[*reason];
    } else {
      out.kept.push_back(trip);
    }
  }
  out.report.total_kept = out.kept.size();
  return out;
}

FilteredTrajectories filter_trips(const std::vector<Trajectory>& trajs,
                                  const FilterRules& rules) {
  FilteredTrajectories out;
  out.report.total_in = trajs.size();
  for (const auto& traj : trajs) {
    if (traj.segment_count < rules.min_segments) {
      ++out.report.counts[RejectReason::too_few_segments];
    } else {
      out.kept.push_back(traj);
    }
  }
  out.report.total_kept = out.kept.size();
  return out;
}

TrajectoryBatch pad_and_mask(const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw Error("pad_and_mask: empty input");
  TrajectoryBatch batch;
  batch.trajectories = trajs;
  for (const auto& t : trajs) {
    batch.max_len = std::max(batch.max_len, static_cast<int>(t.steps.size()));
  }
  const std::size_t total =
      static_cast<std::size_t>(trajs.size()) * batch.max_len;
  batch.padded_states.assign(total, 0);
  batch.padded_actions.assign(total, 0);
  batch.mask.assign(total, 0);
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const auto& steps = trajs[i].steps;
    for (std::size_t t = 0; t < steps.size(); ++t) {
      const std::size_t at = i * batch.max_len + t;
      batch.padded_states[at] = steps[t].state;
      batch.padded_actions[at] = static_cast<std::int32_t>(steps[t].action);
      batch.mask[at] = 1;
    }
  }
  return batch;
}

TripStats trip_stats(const std::vector<Trajectory>& trajs,
                     const std::vector<std::string>& labels,
                     const World& world) {
  if (labels.size() != trajs.size()) {
    throw Error("trip_stats: one label per trip required");
  }
  TripStats stats;
  stats.labels = labels;
  std::map<std::string, std::vector<double>> by_label;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const double dist = world.manhattan_m(trajs[i].origin, trajs[i].destination);
    stats.manhattan_m.push_back(dist);
    ++stats.decision_histogram[trajs[i].segment_count];
    if (dist > 0.0) {
      const double logd = std::log10(dist);
      stats.log10_distance.push_back(logd);
      by_label[labels[i]].push_back(logd);
    } else {
      stats.log10_distance.push_back(std::numeric_limits<double>::quiet_NaN());
      ++stats.zero_distance_count;
    }
  }
  for (const auto& [label, values] : by_label) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    stats.label_mean[label] = mean;
    stats.label_variance[label] = var;
  }
  return stats;
}

std::string TripStats::to_json() const {
  nlohmann::json j;
  j["manhattan_m"] = manhattan_m;
  auto logs = nlohmann::json::array();
  for (double v : log10_distance) {
    if (std::isnan(v)) {
      logs.push_back(nullptr);
    } else {
      logs.push_back(v);
    }
  }
  j["log10_distance"] = std::move(logs);
  j["labels"] = labels;
  j["label_mean"] = label_mean;
  j["label_variance"] = label_variance;
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [segments, count] : decision_histogram) {
    hist[std::to_string(segments)] = count;
  }
  j["decision_histogram"] = std::move(hist);
  j["zero_distance_count"] = zero_distance_count;
  return j.dump(2);
}

std::string TripStats::to_csv() const {
  std::ostringstream out;
  out << "trip_index,label,manhattan_m,log10_distance\n";
  out.precision(12);
  for (std::size_t i = 0; i < manhattan_m.size(); ++i) {
    out << i << ',' << labels[i] << ',' << manhattan_m[i] << ',';
    if (std::isnan(log10_distance[i])) {
      out << "";
    } else {
      out << log10_distance[i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace velopref

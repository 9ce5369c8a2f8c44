#pragma once

#include "detour/geo.hpp"
#include "detour/map_matching.hpp"
#include "detour/road_network.hpp"
#include "detour/routing.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detour {

enum class TripLabel { detour, normal, unlabeled };

std::string_view to_string(TripLabel label);
TripLabel parse_trip_label(std::string_view text);

struct TripRecord {
  std::string trip_id;
  std::string driver_id;
  std::string network;  // name of the network file the segment ids refer to
  std::vector<GpsPoint> raw_gps;
  AbstractTrajectory atr;
  std::vector<RoutePlanStep> plans;  // plans[i] = r(s_i, s_n, t_i)
  LatLng recorded_destination;       // K0, as booked
  LatLng actual_destination;         // K, end of the last atr segment
  double start_time = 0.0;           // epoch seconds
  TripLabel label = TripLabel::unlabeled;
  friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

struct DriverRecord {
  std::string driver_id;
  std::vector<std::string> trips;
  std::vector<double> interval_income;  // one entry per fare interval
  friend bool operator==(const DriverRecord&, const DriverRecord&) = default;
};

/// Dis(atr): kilometers driven from entering the first segment until entering
/// the last one.
double trajectory_distance(const RoadNetwork& net, const AbstractTrajectory& atr);

/// At(atr) = t_n - t_1, in minutes.
double actual_travel_time_min(const AbstractTrajectory& atr);

/// One plan per trajectory step, each computed at that step's timestamp.
std::vector<RoutePlanStep> build_plans(const RoadNetwork& net, const AbstractTrajectory& atr,
                                       const RoutingWeights& w);

/// Throws ErrorKind::structural unless the record is internally consistent.
void validate_trip(const RoadNetwork& net, const TripRecord& trip);

/// epsilon = 1 - Euc(K, K0) / Dis(atr). Negative values are returned as-is.
double destination_change_probability(double displacement_km, double trajectory_km);
double destination_change_probability(const RoadNetwork& net, const TripRecord& trip);

struct FilterRules {
  double min_travel_time_s = 60.0;
  double max_speed_kmh = 120.0;
  double epsilon_bar = 0.01;
  void validate() const;
  friend bool operator==(const FilterRules&, const FilterRules&) = default;
};

enum class RejectReason { structural, min_travel_time, max_speed, destination_change };

std::string_view to_string(RejectReason reason);

struct Rejection {
  TripRecord trip;
  RejectReason reason;
  std::string detail;
};

struct FilterResult {
  std::vector<TripRecord> kept;
  std::vector<Rejection> rejected;
};

/// Applies the screening rules in the order structural, travel time, speed,
/// destination change; each rejected trip carries the first rule it failed.
FilterResult filter_dataset(const RoadNetwork& net, const std::vector<TripRecord>& trips,
                            const FilterRules& rules);

/// Replaces each trip's trajectory with the map-matched version of its raw GPS
/// and rebuilds plans, start time and actual destination accordingly.
void rematch_trip(const RoadNetwork& net, MapMatcher& matcher, TripRecord& trip,
                  const RoutingWeights& w);

// JSONL persistence. One record per line; the field layout is documented in
// README.md.
std::string trip_to_json_line(const TripRecord& trip);
TripRecord trip_from_json_line(std::string_view line);

std::vector<TripRecord> load_trips(const std::filesystem::path& path);
void save_trips(const std::vector<TripRecord>& trips, const std::filesystem::path& path);

void save_rejections(const std::vector<Rejection>& rejected, const std::filesystem::path& path);

std::vector<DriverRecord> load_drivers(const std::filesystem::path& path);
void save_drivers(const std::vector<DriverRecord>& drivers, const std::filesystem::path& path);

/// Calls `parse` on each non-empty line of JSONL text. Parse failures are
/// rethrown as ErrorKind::parse naming `source` and the 1-based line number.
void for_each_jsonl_line(const std::string& text, const std::string& source,
                         const std::function<void(std::string_view)>& parse);

}  // namespace detour

#include "detour/trip.hpp"

#include "detour/detail/json_codec.hpp"
#include "detour/error.hpp"
#include "detour/io.hpp"

#include <cmath>

namespace detour {

std::string_view to_string(TripLabel label) {
  switch (label) {
    case TripLabel::detour: return "detour";
    case TripLabel::normal: return "normal";
    case TripLabel::unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

TripLabel parse_trip_label(std::string_view text) {
  if (text == "detour") return TripLabel::detour;
  if (text == "normal") return TripLabel::normal;
  if (text == "unlabeled") return TripLabel::unlabeled;
  throw Error(ErrorKind::parse, "unknown trip label '" + std::string(text) + "'");
}

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::structural: return "structural";
    case RejectReason::min_travel_time: return "min_travel_time";
    case RejectReason::max_speed: return "max_speed";
    case RejectReason::destination_change: return "destination_change";
  }
  return "structural";
}

double trajectory_distance(const RoadNetwork& net, const AbstractTrajectory& atr) {
  double d = 0.0;
  for (std::size_t i = 0; i + 1 < atr.steps.size(); ++i) {
    d += net.segment(atr.steps[i].segment).length_km;
  }
  return d;
}

double actual_travel_time_min(const AbstractTrajectory& atr) {
  if (atr.steps.empty()) return 0.0;
  return (atr.steps.back().t - atr.steps.front().t) / 60.0;
}

std::vector<RoutePlanStep> build_plans(const RoadNetwork& net, const AbstractTrajectory& atr,
                                       const RoutingWeights& w) {
  std::vector<RoutePlanStep> plans;
  if (atr.steps.empty()) return plans;
  plans.reserve(atr.steps.size());
  const SegmentId dest = atr.steps.back().segment;
  for (const auto& step : atr.steps) {
    plans.push_back(route_plan(net, step.segment, dest, step.t, w));
  }
  return plans;
}

void validate_trip(const RoadNetwork& net, const TripRecord& trip) {
  validate_trajectory(net, trip.atr);
  if (trip.plans.size() != trip.atr.steps.size()) {
    throw Error(ErrorKind::structural, "trip " + trip.trip_id + " has " +
                                           std::to_string(trip.plans.size()) + " plans for " +
                                           std::to_string(trip.atr.steps.size()) + " steps");
  }
  for (std::size_t i = 0; i < trip.plans.size(); ++i) {
    const auto& plan = trip.plans[i];
    if (plan.planned_at != trip.atr.steps[i].t) {
      throw Error(ErrorKind::structural,
                  "trip " + trip.trip_id + " plan " + std::to_string(i) +
                      " is not timestamped at its step");
    }
    const bool at_dest = trip.atr.steps[i].segment == trip.atr.steps.back().segment;
    if (at_dest != plan.path.empty() ||
        (!at_dest && plan.path.front() != trip.atr.steps[i].segment)) {
      throw Error(ErrorKind::structural,
                  "trip " + trip.trip_id + " plan " + std::to_string(i) +
                      " does not start at its step's segment");
    }
  }
  if (!valid_coordinate(trip.recorded_destination) ||
      !valid_coordinate(trip.actual_destination)) {
    throw Error(ErrorKind::structural, "trip " + trip.trip_id + " has bad destination");
  }
  const auto& end = net.node(net.segment(trip.atr.steps.back().segment).to).pos;
  if (haversine_km(end, trip.actual_destination) > 1e-6) {
    throw Error(ErrorKind::structural,
                "trip " + trip.trip_id + " actual destination is not the end of its last segment");
  }
}

double destination_change_probability(double displacement_km, double trajectory_km) {
  if (!(trajectory_km > 0.0)) {
    throw Error(ErrorKind::input, "destination change probability needs Dis(atr) > 0");
  }
  return 1.0 - displacement_km / trajectory_km;
}

double destination_change_probability(const RoadNetwork& net, const TripRecord& trip) {
  return destination_change_probability(
      haversine_km(trip.actual_destination, trip.recorded_destination),
      trajectory_distance(net, trip.atr));
}

void FilterRules::validate() const {
  if (!(min_travel_time_s > 0.0 && max_speed_kmh > 0.0 && epsilon_bar > 0.0 &&
        epsilon_bar <= 1.0)) {
    throw Error(ErrorKind::config, "filter rules must be positive with epsilon_bar in (0, 1]");
  }
}

FilterResult filter_dataset(const RoadNetwork& net, const std::vector<TripRecord>& trips,
                            const FilterRules& rules) {
  rules.validate();
  FilterResult result;
  for (const auto& trip : trips) {
    try {
      validate_trip(net, trip);
    } catch (const Error& e) {
      result.rejected.push_back({trip, RejectReason::structural, e.what()});
      continue;
    }
    const double seconds = trip.atr.steps.back().t - trip.atr.steps.front().t;
    if (seconds < rules.min_travel_time_s) {
      result.rejected.push_back(
          {trip, RejectReason::min_travel_time, std::to_string(seconds) + " s"});
      continue;
    }
    const double km = trajectory_distance(net, trip.atr);
    const double speed = km / (seconds / 3600.0);
    if (speed > rules.max_speed_kmh) {
      result.rejected.push_back({trip, RejectReason::max_speed, std::to_string(speed) + " km/h"});
      continue;
    }
    const double eps = destination_change_probability(net, trip);
    if (eps < rules.epsilon_bar) {
      result.rejected.push_back(
          {trip, RejectReason::destination_change, "epsilon " + std::to_string(eps)});
      continue;
    }
    result.kept.push_back(trip);
  }
  return result;
}

void rematch_trip(const RoadNetwork& net, MapMatcher& matcher, TripRecord& trip,
                  const RoutingWeights& w) {
  trip.atr = matcher.match(trip.raw_gps, trip.trip_id);
  trip.plans = build_plans(net, trip.atr, w);
  trip.start_time = trip.atr.steps.front().t;
  trip.actual_destination = net.node(net.segment(trip.atr.steps.back().segment).to).pos;
}

namespace detail {

json to_json(const LatLng& p) { return {{"lat", p.lat}, {"lng", p.lng}}; }

LatLng latlng_from_json(const json& j) {
  return {j.at("lat").get<double>(), j.at("lng").get<double>()};
}

json to_json(const RoutePlanStep& plan) {
  json path = json::array();
  for (auto s : plan.path) path.push_back(s.value);
  return {{"path", std::move(path)},
          {"planned_at", plan.planned_at},
          {"distance_km", plan.distance_km},
          {"est_time_min", plan.est_time_min}};
}

RoutePlanStep plan_from_json(const json& j) {
  RoutePlanStep plan;
  for (const auto& s : j.at("path")) plan.path.push_back(SegmentId{s.get<std::int64_t>()});
  plan.planned_at = j.at("planned_at").get<double>();
  plan.distance_km = j.at("distance_km").get<double>();
  plan.est_time_min = j.at("est_time_min").get<double>();
  return plan;
}

json to_json(const TripRecord& trip) {
  json atr = json::array();
  for (const auto& s : trip.atr.steps) atr.push_back(json::array({s.segment.value, s.t}));
  json plans = json::array();
  for (const auto& p : trip.plans) plans.push_back(to_json(p));
  json gps = json::array();
  for (const auto& p : trip.raw_gps) gps.push_back(json::array({p.lat, p.lng, p.t}));
  return {{"trip_id", trip.trip_id},
          {"driver_id", trip.driver_id},
          {"network", trip.network},
          {"start_time", trip.start_time},
          {"label", std::string(to_string(trip.label))},
          {"recorded_destination", to_json(trip.recorded_destination)},
          {"actual_destination", to_json(trip.actual_destination)},
          {"atr", std::move(atr)},
          {"plans", std::move(plans)},
          {"raw_gps", std::move(gps)}};
}

TripRecord trip_from_json(const json& j) {
  TripRecord trip;
  trip.trip_id = j.at("trip_id").get<std::string>();
  trip.driver_id = j.at("driver_id").get<std::string>();
  trip.network = j.value("network", std::string{});
  trip.start_time = j.at("start_time").get<double>();
  trip.label = parse_trip_label(j.at("label").get<std::string>());
  trip.recorded_destination = latlng_from_json(j.at("recorded_destination"));
  trip.actual_destination = latlng_from_json(j.at("actual_destination"));
  trip.atr.trip_id = trip.trip_id;
  for (const auto& s : j.at("atr")) {
    trip.atr.steps.push_back({SegmentId{s.at(0).get<std::int64_t>()}, s.at(1).get<double>()});
  }
  for (const auto& p : j.at("plans")) trip.plans.push_back(plan_from_json(p));
  if (j.contains("raw_gps")) {
    for (const auto& p : j.at("raw_gps")) {
      trip.raw_gps.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
    }
  }
  return trip;
}

}  // namespace detail

void for_each_jsonl_line(const std::string& text, const std::string& source,
                         const std::function<void(std::string_view)>& parse) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      parse(line);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::parse,
                  source + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string trip_to_json_line(const TripRecord& trip) { return detail::to_json(trip).dump(); }

TripRecord trip_from_json_line(std::string_view line) {
  return detail::trip_from_json(detail::json::parse(line));
}

std::vector<TripRecord> load_trips(const std::filesystem::path& path) {
  std::vector<TripRecord> trips;
  for_each_jsonl_line(read_text_file(path), path.string(),
                      [&](std::string_view line) { trips.push_back(trip_from_json_line(line)); });
  return trips;
}

void save_trips(const std::vector<TripRecord>& trips, const std::filesystem::path& path) {
  std::string out;
  for (const auto& t : trips) {
    out += trip_to_json_line(t);
    out += '\n';
  }
  write_text_file(path, out);
}

void save_rejections(const std::vector<Rejection>& rejected, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : rejected) {
    auto j = detail::to_json(r.trip);
    j["reject_reason"] = std::string(to_string(r.reason));
    j["reject_detail"] = r.detail;
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<DriverRecord> load_drivers(const std::filesystem::path& path) {
  std::vector<DriverRecord> drivers;
  for_each_jsonl_line(read_text_file(path), path.string(), [&](std::string_view line) {
    const auto j = detail::json::parse(line);
    DriverRecord d;
    d.driver_id = j.at("driver_id").get<std::string>();
    d.trips = j.at("trips").get<std::vector<std::string>>();
    d.interval_income = j.at("interval_income").get<std::vector<double>>();
    drivers.push_back(std::move(d));
  });
  return drivers;
}

void save_drivers(const std::vector<DriverRecord>& drivers, const std::filesystem::path& path) {
  std::string out;
  for (const auto& d : drivers) {
    detail::json j = {{"driver_id", d.driver_id},
                      {"trips", d.trips},
                      {"interval_income", d.interval_income}};
    out += j.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace detour

#include "detour/simulator.hpp"

#include "detour/detail/json_codec.hpp"
#include "detour/error.hpp"
#include "detour/io.hpp"
#include "detour/map_matching.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

namespace detour {

namespace {

constexpr LatLng kCenter{39.9, 116.4};

// Relative taxi demand per hour of day.
constexpr std::array<double, 24> kHourlyDemand = {
    3, 2, 1.5, 1, 1, 1.5, 3, 6, 9, 8, 7, 7, 7, 6, 6, 6, 7, 9, 9, 8, 7, 6, 5, 4};

double round_tenth(double x) { return std::round(x * 10.0) / 10.0; }

std::vector<double> cumulative_positions(SimRng& rng, int count) {
  std::vector<double> pos(static_cast<std::size_t>(count), 0.0);
  for (int i = 1; i < count; ++i) pos[i] = pos[i - 1] + rng.uniform(0.25, 1.45);
  const double mid = pos.back() / 2.0;
  for (auto& p : pos) p -= mid;
  return pos;
}

SpeedProfile day_night_profile(double day_kmh, double night_kmh) {
  return SpeedProfile({{0.0, night_kmh}, {360.0, day_kmh}, {1320.0, night_kmh}});
}

double route_length(const RoadNetwork& net, const std::vector<RoadNetwork::Index>& route) {
  double d = 0.0;
  for (auto s : route) d += net.segment_at(s).length_km;
  return d;
}

std::vector<RoadNetwork::Index> to_indices(const RoadNetwork& net,
                                           const std::vector<SegmentId>& path) {
  std::vector<RoadNetwork::Index> out;
  out.reserve(path.size());
  for (auto id : path) out.push_back(net.segment_index(id));
  return out;
}

std::size_t first_difference(const std::vector<SegmentId>& a, const std::vector<SegmentId>& b) {
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
  return i;
}

struct Detour {
  std::vector<RoadNetwork::Index> route;
  std::size_t start;
};

// Replaces plan edges, from `first` onward, by the cheapest two- or three-hop
// bypass through unused nodes until the target distance is reached.
std::optional<Detour> plant_detour(const RoadNetwork& net, std::vector<RoadNetwork::Index> route,
                                   RoadNetwork::Index dest, std::size_t first,
                                   double plan_km, double inflation) {
  std::vector<char> used(net.node_count(), 0);
  used[net.tail(route.front())] = 1;
  for (auto s : route) used[net.head(s)] = 1;
  used[net.head(dest)] = 1;

  auto reached = [&] {
    const double d = route_length(net, route);
    return d >= (1.0 + inflation) * plan_km && d / plan_km - 1.0 >= inflation;
  };

  std::optional<std::size_t> start;
  std::size_t k = first;
  while (!reached()) {
    if (k >= route.size()) return std::nullopt;
    const auto e = route[k];
    const auto u = net.tail(e);
    const auto v = net.head(e);
    std::vector<RoadNetwork::Index> best;
    double best_len = 0.0;
    auto consider = [&](std::vector<RoadNetwork::Index> cand) {
      const double len = route_length(net, cand);
      auto ids = [&](const std::vector<RoadNetwork::Index>& r) {
        std::vector<std::int64_t> out;
        for (auto s : r) out.push_back(net.segment_at(s).id.value);
        return out;
      };
      if (best.empty() || len < best_len || (len == best_len && ids(cand) < ids(best))) {
        best = std::move(cand);
        best_len = len;
      }
    };
    for (auto sa : net.outgoing(u)) {
      const auto a = net.head(sa);
      if (sa == e || used[a]) continue;
      for (auto sb : net.outgoing(a)) {
        const auto b = net.head(sb);
        if (b == v) {
          consider({sa, sb});
          continue;
        }
        if (used[b] || b == a) continue;
        for (auto sc : net.outgoing(b)) {
          if (net.head(sc) == v) consider({sa, sb, sc});
        }
      }
    }
    if (best.empty()) {
      ++k;
      continue;
    }
    if (!start) start = k;
    for (auto s : best) used[net.head(s)] = 1;
    route.erase(route.begin() + static_cast<std::ptrdiff_t>(k));
    route.insert(route.begin() + static_cast<std::ptrdiff_t>(k), best.begin(), best.end());
    k += best.size();
  }
  if (!start) return std::nullopt;
  return Detour{std::move(route), *start};
}

}  // namespace

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::normal: return "normal";
    case Behavior::detour: return "detour";
    case Behavior::avoid_congestion: return "avoid_congestion";
    case Behavior::shortcut: return "shortcut";
  }
  return "normal";
}

Behavior parse_behavior(std::string_view text) {
  if (text == "normal") return Behavior::normal;
  if (text == "detour") return Behavior::detour;
  if (text == "avoid_congestion") return Behavior::avoid_congestion;
  if (text == "shortcut") return Behavior::shortcut;
  throw Error(ErrorKind::parse, "unknown behavior '" + std::string(text) + "'");
}

void BehaviorMix::validate() const {
  for (double p : {normal, detour, avoid_congestion, shortcut}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::config, "behavior probabilities must lie in [0, 1]");
    }
  }
  if (std::abs(normal + detour + avoid_congestion + shortcut - 1.0) > 1e-9) {
    throw Error(ErrorKind::config, "behavior probabilities must sum to 1");
  }
}

void SimConfig::validate() const {
  behavior_mix.validate();
  weights.validate();
  if (rows < 2 || cols < 2) throw Error(ErrorKind::input, "grid dims must be at least 2x2");
  if (n_trips == 0 || n_drivers == 0 || min_plan_segments == 0) {
    throw Error(ErrorKind::config, "trip, driver and segment counts must be positive");
  }
  if (!(detour_inflation >= 0.0) || !(detour_start_max >= 0.0 && detour_start_max <= 1.0)) {
    throw Error(ErrorKind::config, "detour_inflation >= 0 and detour_start_max in [0, 1]");
  }
  if (!(gps_period_s > 0.0) || !(gps_noise_m >= 0.0) || !(destination_jitter_m >= 0.0)) {
    throw Error(ErrorKind::config, "gps period must be positive and noise non-negative");
  }
}

double SimRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t SimRng::index(std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

double SimRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

RoadNetwork generate_network(const SimConfig& cfg) {
  if (cfg.rows < 2 || cfg.cols < 2) {
    throw Error(ErrorKind::input, "grid dims must be at least 2x2");
  }
  SimRng rng(derive_seed(cfg.seed, 0));
  const auto xs = cumulative_positions(rng, cfg.cols);
  const auto ys = cumulative_positions(rng, cfg.rows);
  const double km_per_deg = kEarthRadiusKm * std::numbers::pi / 180.0;

  std::vector<Node> nodes;
  auto node_id = [&](int r, int c) { return NodeId{static_cast<std::int64_t>(r) * cfg.cols + c + 1}; };
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      const double lat = kCenter.lat + ys[r] / km_per_deg;
      const double lng =
          kCenter.lng + xs[c] / (km_per_deg * std::cos(kCenter.lat * std::numbers::pi / 180.0));
      nodes.push_back({node_id(r, c), {lat, lng}});
    }
  }

  std::vector<Segment> segments;
  std::int64_t next_id = 1;
  auto add_pair = [&](int r1, int c1, int r2, int c2, bool arterial) {
    const auto a = node_id(r1, c1);
    const auto b = node_id(r2, c2);
    const double len = haversine_km(nodes[a.value - 1].pos, nodes[b.value - 1].pos);
    for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
      const double day = arterial ? rng.uniform(32.0, 45.0) : rng.uniform(18.0, 28.0);
      const double night = day * (arterial ? rng.uniform(1.2, 1.4) : rng.uniform(1.3, 1.6));
      segments.push_back({SegmentId{next_id++}, from, to, len,
                          day_night_profile(round_tenth(day), round_tenth(night))});
    }
  };
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c + 1 < cfg.cols; ++c) add_pair(r, c, r, c + 1, r % 3 == 1);
  }
  for (int c = 0; c < cfg.cols; ++c) {
    for (int r = 0; r + 1 < cfg.rows; ++r) add_pair(r, c, r + 1, c, c % 3 == 1);
  }
  return RoadNetwork(std::move(nodes), std::move(segments));
}

std::vector<double> drive_times(const RoadNetwork& net, std::span<const SegmentId> segments,
                                double start_epoch_s) {
  std::vector<double> times;
  times.reserve(segments.size());
  const double m0 = minute_of_day(start_epoch_s);
  double entry = m0;
  for (auto id : segments) {
    times.push_back(start_epoch_s + (entry - m0) * 60.0);
    entry += segment_travel_time(net.segment(id), entry);
  }
  return times;
}

std::vector<GpsPoint> sample_gps(const RoadNetwork& net, std::span<const SegmentId> segments,
                                 std::span<const double> entry_times, double period_s,
                                 double noise_m, SimRng& rng) {
  std::vector<GpsPoint> out;
  if (segments.empty()) return out;
  const auto& last = net.segment(segments.back());
  const double end = entry_times.back() +
                     segment_travel_time(last, minute_of_day(entry_times.back())) * 60.0;
  std::size_t j = 0;
  for (double t = entry_times.front() + 0.5 * period_s; t < end;
       t = entry_times.front() + (static_cast<double>(out.size()) + 0.5) * period_s) {
    while (j + 1 < segments.size() && entry_times[j + 1] <= t) ++j;
    const auto& seg = net.segment(segments[j]);
    const double exit = j + 1 < segments.size() ? entry_times[j + 1] : end;
    const double f = (t - entry_times[j]) / (exit - entry_times[j]);
    const auto& a = net.node(seg.from).pos;
    const auto& b = net.node(seg.to).pos;
    LatLng p{a.lat + f * (b.lat - a.lat), a.lng + f * (b.lng - a.lng)};
    const double dx = rng.normal() * noise_m;
    const double dy = rng.normal() * noise_m;
    if (noise_m > 0.0) p = offset_meters(p, dx, dy);
    out.push_back({p.lat, p.lng, t});
  }
  return out;
}

std::vector<SimulatedTrip> generate_trips(const RoadNetwork& net, const SimConfig& cfg) {
  cfg.validate();
  if (net.segment_count() < 2) throw Error(ErrorKind::input, "network has too few segments");
  double demand_total = 0.0;
  for (double w : kHourlyDemand) demand_total += w;

  std::vector<SimulatedTrip> trips;
  trips.reserve(cfg.n_trips);
  for (std::size_t i = 0; i < cfg.n_trips; ++i) {
    SimRng rng(derive_seed(cfg.seed, i + 1));

    const auto& mix = cfg.behavior_mix;
    const double ub = rng.uniform();
    Behavior requested = Behavior::shortcut;
    if (ub < mix.normal) requested = Behavior::normal;
    else if (ub < mix.normal + mix.detour) requested = Behavior::detour;
    else if (ub < mix.normal + mix.detour + mix.avoid_congestion) requested = Behavior::avoid_congestion;
    if (requested == Behavior::shortcut && mix.shortcut == 0.0) requested = Behavior::normal;

    double pick = rng.uniform() * demand_total;
    int hour = 0;
    while (hour < 23 && pick >= kHourlyDemand[hour]) pick -= kHourlyDemand[hour++];
    const double minute = hour * 60.0 + rng.uniform(0.0, 60.0);
    const double t1 = cfg.day_epoch_s + std::floor(minute * 60.0);

    RoadNetwork::Index origin = 0;
    RoadNetwork::Index dest = 0;
    RoutePlanStep plan;
    bool found = false;
    for (int attempt = 0; attempt < 1000 && !found; ++attempt) {
      origin = static_cast<RoadNetwork::Index>(rng.index(net.segment_count()));
      dest = static_cast<RoadNetwork::Index>(rng.index(net.segment_count()));
      if (origin == dest) continue;
      try {
        plan = route_plan(net, net.segment_at(origin).id, net.segment_at(dest).id, t1, cfg.weights);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::no_route) throw;
        continue;
      }
      found = plan.path.size() >= cfg.min_plan_segments;
    }
    if (!found) {
      throw Error(ErrorKind::input, "no origin/destination pair with at least " +
                                        std::to_string(cfg.min_plan_segments) +
                                        " plan segments");
    }
    const SegmentId dest_id = net.segment_at(dest).id;

    GroundTruth truth;
    truth.requested = requested;
    truth.behavior = Behavior::normal;
    truth.segments = plan.path;
    switch (requested) {
      case Behavior::normal:
        break;
      case Behavior::detour: {
        const auto m = plan.path.size();
        auto first = static_cast<std::size_t>(rng.uniform() * cfg.detour_start_max *
                                              static_cast<double>(m));
        first = std::clamp<std::size_t>(first, 1, m - 1);
        if (auto d = plant_detour(net, to_indices(net, plan.path), dest, first, plan.distance_km,
                                  cfg.detour_inflation)) {
          truth.behavior = Behavior::detour;
          truth.segments.clear();
          for (auto s : d->route) truth.segments.push_back(net.segment_at(s).id);
        }
        break;
      }
      case Behavior::avoid_congestion:
      case Behavior::shortcut: {
        const bool avoid = requested == Behavior::avoid_congestion;
        const auto alt = route_plan(net, plan.path.front(), dest_id, t1,
                                    avoid ? RoutingWeights{0.0, 1.0} : RoutingWeights{1.0, 0.0});
        const bool ok = avoid ? alt.distance_km > plan.distance_km &&
                                    alt.est_time_min < plan.est_time_min
                              : alt.distance_km < plan.distance_km &&
                                    alt.est_time_min > plan.est_time_min;
        if (ok) {
          truth.behavior = requested;
          truth.segments = alt.path;
        }
        break;
      }
    }
    truth.deviation_start = first_difference(plan.path, truth.segments);
    if (truth.behavior == Behavior::normal) truth.deviation_start = plan.path.size() + 1;
    truth.segments.push_back(dest_id);
    truth.entry_times = drive_times(net, truth.segments, t1);

    SimulatedTrip trip;
    auto& rec = trip.record;
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%06zu", i);
    rec.trip_id = buf;
    std::snprintf(buf, sizeof buf, "d%04zu", rng.index(cfg.n_drivers));
    rec.driver_id = buf;
    rec.raw_gps = sample_gps(net, truth.segments, truth.entry_times, cfg.gps_period_s,
                             cfg.gps_noise_m, rng);
    rec.atr.trip_id = rec.trip_id;
    for (std::size_t k = 0; k < truth.segments.size(); ++k) {
      rec.atr.steps.push_back({truth.segments[k], truth.entry_times[k]});
    }
    rec.plans = build_plans(net, rec.atr, cfg.weights);
    rec.actual_destination = net.node_at(net.head(dest)).pos;
    const double angle = rng.uniform() * 2.0 * std::numbers::pi;
    rec.recorded_destination =
        offset_meters(rec.actual_destination, cfg.destination_jitter_m * std::cos(angle),
                      cfg.destination_jitter_m * std::sin(angle));
    rec.start_time = t1;
    rec.label = truth.behavior == Behavior::detour ? TripLabel::detour : TripLabel::normal;
    trip.truth = std::move(truth);
    trips.push_back(std::move(trip));
  }
  return trips;
}

void rematch_trips(const RoadNetwork& net, std::vector<SimulatedTrip>& trips,
                   const MatchConfig& mcfg, const RoutingWeights& w) {
  MapMatcher matcher(net, mcfg);
  for (auto& t : trips) rematch_trip(net, matcher, t.record, w);
}

namespace {

detail::json truth_to_json(const GroundTruth& g) {
  detail::json segs = detail::json::array();
  for (auto s : g.segments) segs.push_back(s.value);
  return {{"requested", std::string(to_string(g.requested))},
          {"behavior", std::string(to_string(g.behavior))},
          {"segments", std::move(segs)},
          {"entry_times", g.entry_times},
          {"deviation_start", g.deviation_start}};
}

GroundTruth truth_from_json(const detail::json& j) {
  GroundTruth g;
  g.requested = parse_behavior(j.at("requested").get<std::string>());
  g.behavior = parse_behavior(j.at("behavior").get<std::string>());
  for (const auto& s : j.at("segments")) g.segments.push_back(SegmentId{s.get<std::int64_t>()});
  g.entry_times = j.at("entry_times").get<std::vector<double>>();
  g.deviation_start = j.at("deviation_start").get<std::size_t>();
  return g;
}

}  // namespace

std::string simulated_trip_to_json_line(const SimulatedTrip& trip) {
  auto j = detail::to_json(trip.record);
  j["truth"] = truth_to_json(trip.truth);
  return j.dump();
}

SimulatedTrip simulated_trip_from_json_line(std::string_view line) {
  const auto j = detail::json::parse(line);
  SimulatedTrip trip;
  trip.record = detail::trip_from_json(j);
  if (j.contains("truth")) trip.truth = truth_from_json(j.at("truth"));
  return trip;
}

std::vector<SimulatedTrip> load_simulated_trips(const std::filesystem::path& path) {
  std::vector<SimulatedTrip> trips;
  for_each_jsonl_line(read_text_file(path), path.string(), [&](std::string_view line) {
    trips.push_back(simulated_trip_from_json_line(line));
  });
  return trips;
}

void save_simulated_trips(const std::vector<SimulatedTrip>& trips,
                          const std::filesystem::path& path) {
  std::string out;
  for (const auto& t : trips) {
    out += simulated_trip_to_json_line(t);
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<TripRecord> records_of(const std::vector<SimulatedTrip>& trips) {
  std::vector<TripRecord> out;
  out.reserve(trips.size());
  for (const auto& t : trips) out.push_back(t.record);
  return out;
}

}  // namespace detour

#pragma once

#include "detour/road_network.hpp"
#include "detour/routing.hpp"
#include "detour/trip.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace detour {

enum class Behavior { normal, detour, avoid_congestion, shortcut };

std::string_view to_string(Behavior b);
Behavior parse_behavior(std::string_view text);

struct BehaviorMix {
  double normal = 1.0;
  double detour = 0.0;
  double avoid_congestion = 0.0;
  double shortcut = 0.0;
  void validate() const;
  friend bool operator==(const BehaviorMix&, const BehaviorMix&) = default;
};

struct SimConfig {
  std::uint64_t seed = 1;
  int rows = 10;
  int cols = 10;
  std::size_t n_trips = 1000;
  std::size_t n_drivers = 50;
  BehaviorMix behavior_mix;
  double detour_inflation = 0.3;
  double detour_start_max = 0.5;  // detours start within this leading fraction of the plan
  double gps_period_s = 10.0;
  double gps_noise_m = 0.0;
  double destination_jitter_m = 20.0;  // booked destination K0 vs actual K
  std::size_t min_plan_segments = 6;
  double day_epoch_s = 1543622400.0;  // midnight UTC of the simulated day
  RoutingWeights weights;
  void validate() const;
  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct GroundTruth {
  Behavior requested = Behavior::normal;
  Behavior behavior = Behavior::normal;  // what was realized after fallbacks
  std::vector<SegmentId> segments;       // full driven sequence, destination included
  std::vector<double> entry_times;       // epoch seconds, one per segment
  std::size_t deviation_start = 0;       // index in `segments` where driving leaves the plan
  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SimulatedTrip {
  TripRecord record;
  GroundTruth truth;
  friend bool operator==(const SimulatedTrip&, const SimulatedTrip&) = default;
};

/// Seeded random source with platform-independent uniform and normal draws.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Sub-seed for stream `index` derived from a base seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Irregular grid centered on (39.9, 116.4): every adjacent node pair is
/// joined in both directions; every third row and column is a faster
/// arterial. Speeds switch between a day level on [360, 1320) and a faster
/// night level elsewhere.
RoadNetwork generate_network(const SimConfig& cfg);

/// Entry timestamps for driving `segments` from `start_epoch_s`.
std::vector<double> drive_times(const RoadNetwork& net, std::span<const SegmentId> segments,
                                double start_epoch_s);

/// GPS fixes every `period_s` (half a period after departure, then every
/// period) along `segments` until the end of the last one, with Gaussian
/// noise of `noise_m` per axis.
std::vector<GpsPoint> sample_gps(const RoadNetwork& net, std::span<const SegmentId> segments,
                                 std::span<const double> entry_times, double period_s,
                                 double noise_m, SimRng& rng);

std::vector<SimulatedTrip> generate_trips(const RoadNetwork& net, const SimConfig& cfg);

/// Rebuilds every trip's trajectory from its GPS fixes by map matching.
void rematch_trips(const RoadNetwork& net, std::vector<SimulatedTrip>& trips,
                   const MatchConfig& mcfg, const RoutingWeights& w);

std::string simulated_trip_to_json_line(const SimulatedTrip& trip);
SimulatedTrip simulated_trip_from_json_line(std::string_view line);

/// Lines without ground truth load with a default GroundTruth.
std::vector<SimulatedTrip> load_simulated_trips(const std::filesystem::path& path);
void save_simulated_trips(const std::vector<SimulatedTrip>& trips,
                          const std::filesystem::path& path);

std::vector<TripRecord> records_of(const std::vector<SimulatedTrip>& trips);

}  // namespace detour

#include "oracles.hpp"

#include "detour/error.hpp"
#include "detour/offline_classifier.hpp"
#include "detour/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace detour;

TEST(SimRng, DeterministicAndInRange) {
  SimRng a(5), b(5);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double z = a.normal();
    b.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.03);
  EXPECT_NEAR(sq / 20000, 1.0, 0.05);
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(GenerateNetwork, SameSeedSameNetwork) {
  SimConfig cfg;
  cfg.seed = 9;
  EXPECT_EQ(network_to_json(generate_network(cfg)), network_to_json(generate_network(cfg)));
  SimConfig other = cfg;
  other.seed = 10;
  EXPECT_NE(network_to_json(generate_network(cfg)), network_to_json(generate_network(other)));
}

TEST(GenerateNetwork, ThreeByThreeGrid) {
  SimConfig cfg;
  cfg.rows = 3;
  cfg.cols = 3;
  const auto net = generate_network(cfg);
  EXPECT_EQ(net.node_count(), 9u);
  EXPECT_EQ(net.segment_count(), 24u);
}

TEST(GenerateNetwork, LengthsMatchGeometryAndStayInBounds) {
  SimConfig cfg;
  cfg.rows = 12;
  cfg.cols = 12;
  const auto net = generate_network(cfg);
  for (const auto& s : net.segments()) {
    EXPECT_GE(s.length_km, 0.2);
    EXPECT_LE(s.length_km, 1.5);
    EXPECT_NEAR(s.length_km, haversine_km(net.node(s.from).pos, net.node(s.to).pos), 1e-9);
    EXPECT_GT(s.profile.speed_at(0.0), s.profile.speed_at(600.0));
  }
}

TEST(GenerateNetwork, RejectsDegenerateGrids) {
  SimConfig cfg;
  cfg.rows = 1;
  EXPECT_THROW(generate_network(cfg), Error);
}

TEST(DriveTimes, FollowTheSpeedProfile) {
  SimConfig cfg;
  const auto net = generate_network(cfg);
  const auto& s1 = net.segment_at(0);
  const auto& s2 = net.segment_at(net.outgoing(net.head(0))[0]);
  const std::vector<SegmentId> path{s1.id, s2.id};
  const double start = cfg.day_epoch_s + 8 * 3600.0;
  const auto times = drive_times(net, path, start);
  ASSERT_EQ(times.size(), 2u);
  EXPECT_EQ(times[0], start);
  EXPECT_NEAR(times[1] - start, segment_travel_time(s1, 480.0) * 60.0, 1e-6);
}

TEST(GenerateTrips, Deterministic) {
  SimConfig cfg;
  cfg.n_trips = 200;
  cfg.behavior_mix = {0.6, 0.2, 0.1, 0.1};
  cfg.gps_noise_m = 8.0;
  const auto net = generate_network(cfg);
  EXPECT_EQ(generate_trips(net, cfg), generate_trips(net, cfg));
}

TEST(GenerateTrips, NormalTripsHaveZeroFeatures) {
  SimConfig cfg;
  cfg.n_trips = 300;
  const auto net = generate_network(cfg);
  for (const auto& t : generate_trips(net, cfg)) {
    EXPECT_EQ(t.record.label, TripLabel::normal);
    const auto x = offline_features(net, t.record);
    EXPECT_EQ(x.x1, 0.0);
    EXPECT_EQ(x.x2, 0.0);
    EXPECT_NO_THROW(validate_trip(net, t.record));
  }
}

TEST(GenerateTrips, DetoursMeetTheInflationTarget) {
  SimConfig cfg;
  cfg.n_trips = 300;
  cfg.behavior_mix = {0.0, 1.0, 0.0, 0.0};
  const auto net = generate_network(cfg);
  std::size_t realized = 0;
  for (const auto& t : generate_trips(net, cfg)) {
    if (t.truth.behavior != Behavior::detour) continue;
    ++realized;
    EXPECT_EQ(t.record.label, TripLabel::detour);
    const double plan_km = t.record.plans.front().distance_km;
    const auto x = offline_features(net, t.record);
    EXPECT_GE(trajectory_distance(net, t.record.atr), 1.3 * plan_km);
    EXPECT_GE(x.x1, 0.3);
    EXPECT_GT(x.x2, 0.0);
    EXPECT_LT(t.truth.deviation_start, t.truth.segments.size());
  }
  EXPECT_GE(realized, 285u);
}

TEST(GenerateTrips, BehaviorSignPatterns) {
  SimConfig cfg;
  cfg.n_trips = 600;
  cfg.behavior_mix = {0.0, 0.0, 0.5, 0.5};
  const auto net = generate_network(cfg);
  std::size_t avoid = 0, cut = 0;
  for (const auto& t : generate_trips(net, cfg)) {
    const auto x = offline_features(net, t.record);
    if (t.truth.behavior == Behavior::avoid_congestion) {
      ++avoid;
      EXPECT_GT(x.x1, 0.0);
      EXPECT_LT(x.x2, 0.0);
    } else if (t.truth.behavior == Behavior::shortcut) {
      ++cut;
      EXPECT_LT(x.x1, 0.0);
      EXPECT_GT(x.x2, 0.0);
    }
    EXPECT_NE(t.record.label, TripLabel::detour);
  }
  EXPECT_GT(avoid, 0u);
  EXPECT_GT(cut, 0u);
}

TEST(GenerateTrips, LabelProportionsFollowTheMix) {
  SimConfig cfg;
  cfg.n_trips = 10000;
  cfg.behavior_mix = {0.8, 0.2, 0.0, 0.0};
  const auto net = generate_network(cfg);
  const auto trips = generate_trips(net, cfg);
  std::size_t detours = 0;
  for (const auto& t : trips) detours += t.record.label == TripLabel::detour ? 1 : 0;
  EXPECT_NEAR(static_cast<double>(detours) / trips.size(), 0.2, 0.02);
}

TEST(GenerateTrips, GpsCoversTheTripAndDestinationIsJittered) {
  SimConfig cfg;
  cfg.n_trips = 100;
  cfg.gps_period_s = 5.0;
  const auto net = generate_network(cfg);
  std::set<std::string> drivers;
  for (const auto& t : generate_trips(net, cfg)) {
    const auto& r = t.record;
    drivers.insert(r.driver_id);
    ASSERT_GE(r.raw_gps.size(), 2u);
    EXPECT_NEAR(r.raw_gps.front().t - r.start_time, 2.5, 1e-9);
    for (std::size_t k = 1; k < r.raw_gps.size(); ++k) {
      EXPECT_NEAR(r.raw_gps[k].t - r.raw_gps[k - 1].t, 5.0, 1e-6);
    }
    EXPECT_NEAR(haversine_km(r.actual_destination, r.recorded_destination), 0.02, 1e-6);
    EXPECT_EQ(t.truth.segments.back(), r.atr.steps.back().segment);
    EXPECT_GE(r.plans.front().path.size(), cfg.min_plan_segments);
  }
  EXPECT_LE(drivers.size(), cfg.n_drivers);
}

TEST(GenerateTrips, PlantedSeparationWithoutNoise) {
  SimConfig cfg;
  cfg.n_trips = 500;
  cfg.behavior_mix = {0.8, 0.2, 0.0, 0.0};
  cfg.detour_inflation = 0.2;
  const auto net = generate_network(cfg);
  for (const auto& t : generate_trips(net, cfg)) {
    const auto x = offline_features(net, t.record);
    if (t.record.label == TripLabel::detour) EXPECT_GE(x.x1, 0.2);
    else EXPECT_EQ(x.x1, 0.0);
  }
}

TEST(SimConfig, ValidatesFields) {
  SimConfig cfg;
  cfg.behavior_mix = {0.5, 0.1, 0.0, 0.0};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.behavior_mix = {};
  cfg.detour_inflation = -0.1;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.detour_inflation = 0.3;
  cfg.gps_period_s = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Behavior, NamesRoundTrip) {
  for (auto b : {Behavior::normal, Behavior::detour, Behavior::avoid_congestion, Behavior::shortcut}) {
    EXPECT_EQ(parse_behavior(to_string(b)), b);
  }
  EXPECT_THROW(parse_behavior("wander"), Error);
}

#include "oracles.hpp"

#include "detour/error.hpp"
#include "detour/geo.hpp"
#include "detour/road_network.hpp"
#include "detour/simulator.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace detour;

TEST(Geo, HaversineIdentityIsZero) {
  const LatLng p{39.9, 116.4};
  EXPECT_EQ(haversine_km(p, p), 0.0);
}

TEST(Geo, HaversineMatchesIndependentFormula) {
  const double got = haversine_km({39.9, 116.4}, {39.9, 116.41});
  EXPECT_NEAR(got, oracle::haversine_km(39.9, 116.4, 39.9, 116.41), 1e-6);
  EXPECT_NEAR(got, 0.8530, 1e-3);
}

TEST(Geo, HaversineIsSymmetric) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const LatLng a{oracle::uniform(rng, -80, 80), oracle::uniform(rng, -179, 179)};
    const LatLng b{oracle::uniform(rng, -80, 80), oracle::uniform(rng, -179, 179)};
    EXPECT_EQ(haversine_km(a, b), haversine_km(b, a));
    EXPECT_NEAR(haversine_km(a, b), oracle::haversine_km(a.lat, a.lng, b.lat, b.lng), 1e-6);
  }
}

TEST(Geo, WrapMinuteStaysOnTheDay) {
  EXPECT_EQ(wrap_minute(0.0), 0.0);
  EXPECT_EQ(wrap_minute(1440.0), 0.0);
  EXPECT_EQ(wrap_minute(1500.0), 60.0);
  EXPECT_EQ(wrap_minute(-60.0), 1380.0);
  EXPECT_LT(wrap_minute(std::nextafter(2880.0, 0.0)), 1440.0);
  EXPECT_EQ(minute_of_day(1543622400.0 + 90.0), 1.5);
}

TEST(Geo, OffsetMetersMovesByTheRequestedDistance) {
  const LatLng p{39.9, 116.4};
  EXPECT_NEAR(haversine_km(p, offset_meters(p, 0.0, 1000.0)), 1.0, 1e-3);
  EXPECT_NEAR(haversine_km(p, offset_meters(p, 300.0, -400.0)), 0.5, 1e-3);
}

Segment two_bucket_segment() {
  Segment s;
  s.id = SegmentId{1};
  s.from = NodeId{1};
  s.to = NodeId{2};
  s.length_km = 2.0;
  s.profile = SpeedProfile({{0.0, 30.0}, {720.0, 60.0}});
  return s;
}

TEST(SegmentTravelTime, FlatProfile) {
  Segment s = two_bucket_segment();
  s.length_km = 1.0;
  s.profile = SpeedProfile::flat(60.0);
  for (double t : {0.0, 359.5, 1439.9}) EXPECT_EQ(segment_travel_time(s, t), 1.0);
}

TEST(SegmentTravelTime, SpeedSampledAtEntry) {
  const Segment s = two_bucket_segment();
  EXPECT_EQ(segment_travel_time(s, 100.0), 4.0);
  EXPECT_EQ(segment_travel_time(s, 800.0), 2.0);
  EXPECT_EQ(segment_travel_time(s, 719.999), 4.0);
  EXPECT_EQ(segment_travel_time(s, 720.0), 2.0);
  EXPECT_EQ(segment_travel_time(s, 1440.0 + 100.0), 4.0);
}

TEST(SpeedProfile, RejectsMalformedBuckets) {
  EXPECT_THROW(SpeedProfile(std::vector<SpeedBucket>{}), Error);
  EXPECT_THROW(SpeedProfile({{10.0, 30.0}}), Error);
  EXPECT_THROW(SpeedProfile({{0.0, 30.0}, {0.0, 40.0}}), Error);
  EXPECT_THROW(SpeedProfile({{0.0, 0.0}}), Error);
}

TEST(SpeedProfile, MaxSpeedAndSpeedups) {
  const SpeedProfile p({{0.0, 50.0}, {360.0, 20.0}, {1320.0, 50.0}});
  EXPECT_EQ(p.max_speed(), 50.0);
  EXPECT_EQ(p.max_speed_in(400.0, 500.0), 20.0);
  EXPECT_EQ(p.max_speed_in(400.0, 1330.0), 50.0);
  EXPECT_EQ(p.max_speed_in(1000.0, 1000.0 + 1440.0), 50.0);
  EXPECT_EQ(p.speedup_minutes(), std::vector<double>{1320.0});
}

RoadNetwork tiny() {
  return oracle::make_network({{39.9, 116.4}, {39.91, 116.4}, {39.91, 116.41}},
                              {{1, 2, 1.1, 30.0}, {2, 3, 0.9, 40.0}, {3, 1, 1.5, 20.0}});
}

TEST(RoadNetwork, Adjacency) {
  const auto net = tiny();
  EXPECT_EQ(net.node_count(), 3u);
  EXPECT_EQ(net.segment_count(), 3u);
  const auto s2 = net.segment_index(SegmentId{2});
  EXPECT_EQ(net.node_at(net.tail(s2)).id, NodeId{2});
  EXPECT_EQ(net.node_at(net.head(s2)).id, NodeId{3});
  ASSERT_EQ(net.outgoing(net.node_index(NodeId{2})).size(), 1u);
  EXPECT_EQ(net.incoming(net.node_index(NodeId{1}))[0], net.segment_index(SegmentId{3}));
  EXPECT_FALSE(net.has_segment(SegmentId{9}));
  EXPECT_THROW(net.segment(SegmentId{9}), Error);
}

TEST(RoadNetwork, RejectsDanglingAndDuplicateIds) {
  std::vector<Node> nodes{{NodeId{1}, {39.9, 116.4}}, {NodeId{2}, {39.91, 116.4}}};
  Segment s;
  s.id = SegmentId{1};
  s.from = NodeId{1};
  s.to = NodeId{3};
  s.length_km = 1.0;
  s.profile = SpeedProfile::flat(30);
  EXPECT_THROW(RoadNetwork(nodes, {s}), Error);
  s.to = NodeId{2};
  EXPECT_THROW(RoadNetwork(nodes, {s, s}), Error);
  s.length_km = 0.0;
  EXPECT_THROW(RoadNetwork(nodes, {s}), Error);
}

TEST(RoadNetwork, JsonRoundTripIsByteIdentical) {
  SimConfig cfg;
  cfg.rows = 4;
  cfg.cols = 5;
  const auto net = generate_network(cfg);
  const auto text = network_to_json(net);
  const auto back = network_from_json(text);
  EXPECT_EQ(network_to_json(back), text);
  EXPECT_EQ(back.segment_count(), net.segment_count());
  for (std::size_t i = 0; i < net.segment_count(); ++i) {
    EXPECT_EQ(back.segment_at(i), net.segment_at(i));
  }
}

TEST(RoadNetwork, FileRoundTripAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "detour_network_test";
  std::filesystem::create_directories(dir);
  const auto net = tiny();
  save_network(net, dir / "n.json");
  EXPECT_EQ(network_to_json(load_network(dir / "n.json")), network_to_json(net));
  try {
    load_network(dir / "absent.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::missing_input);
  }
}

TEST(RoadNetwork, MalformedJsonIsAParseError) {
  try {
    network_from_json("{\"nodes\": [");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
}

TEST(RoadNetwork, SpeedupDetectionWrapsMidnight) {
  auto net = oracle::make_network({{39.9, 116.4}, {39.91, 116.4}}, {{1, 2, 1.0, 30.0}});
  Segment s = net.segment_at(0);
  s.profile = SpeedProfile({{0.0, 50.0}, {360.0, 20.0}, {1320.0, 50.0}});
  const RoadNetwork n2({net.node_at(0), net.node_at(1)}, {s});
  EXPECT_TRUE(n2.has_speedup_in(1300.0, 1320.0));
  EXPECT_FALSE(n2.has_speedup_in(1320.0, 1400.0));
  EXPECT_TRUE(n2.has_speedup_in(1400.0 + 1440.0, 1330.0 + 2880.0));
  EXPECT_FALSE(n2.has_speedup_in(400.0, 1300.0));
}

#include "oracles.hpp"

#include "detour/error.hpp"
#include "detour/map_matching.hpp"
#include "detour/simulator.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace detour;

namespace {

const LatLng kCenter{39.9, 116.4};

// West -> center -> east and center -> north, each 500 m.
RoadNetwork t_junction() {
  const auto w = offset_meters(kCenter, -500, 0);
  const auto e = offset_meters(kCenter, 500, 0);
  const auto n = offset_meters(kCenter, 0, 500);
  return oracle::make_network({{w.lat, w.lng}, {kCenter.lat, kCenter.lng}, {e.lat, e.lng}, {n.lat, n.lng}},
                              {{1, 2, 0.5, 30.0}, {2, 3, 0.5, 30.0}, {2, 4, 0.5, 30.0}});
}

GpsPoint at(double east_m, double north_m, double t) {
  const auto p = offset_meters(kCenter, east_m, north_m);
  return {p.lat, p.lng, t};
}

}  // namespace

TEST(ValidateTrajectory, RejectsGapsAndTimeReversal) {
  const auto net = t_junction();
  AbstractTrajectory ok{"t", {{SegmentId{1}, 0.0}, {SegmentId{3}, 10.0}}};
  EXPECT_NO_THROW(validate_trajectory(net, ok));
  AbstractTrajectory gap{"t", {{SegmentId{2}, 0.0}, {SegmentId{3}, 10.0}}};
  EXPECT_THROW(validate_trajectory(net, gap), Error);
  AbstractTrajectory back{"t", {{SegmentId{1}, 10.0}, {SegmentId{3}, 10.0}}};
  EXPECT_THROW(validate_trajectory(net, back), Error);
  EXPECT_THROW(validate_trajectory(net, AbstractTrajectory{}), Error);
}

TEST(MapMatcher, PointsOnOneSegmentCollapse) {
  const auto net = t_junction();
  std::vector<GpsPoint> pts;
  for (int k = 0; k < 5; ++k) pts.push_back(at(-450 + 80 * k, (k % 2 ? 4.0 : -4.0), 100.0 + 10 * k));
  const auto atr = match_trajectory(net, pts, MatchConfig{});
  ASSERT_EQ(atr.steps.size(), 1u);
  EXPECT_EQ(atr.steps[0].segment, SegmentId{1});
  EXPECT_EQ(atr.steps[0].t, 100.0);
}

TEST(MapMatcher, CandidatesAreInSegmentIdOrderWithinRadius) {
  const auto net = t_junction();
  MapMatcher m(net, MatchConfig{});
  const auto cands = m.candidates(at(10, 10, 0));
  ASSERT_EQ(cands.size(), 3u);
  for (std::size_t i = 1; i < cands.size(); ++i) EXPECT_LT(cands[i - 1].segment, cands[i].segment);
  EXPECT_TRUE(m.candidates(at(0, -400, 0)).empty());
  MatchConfig two;
  two.max_candidates = 2;
  MapMatcher m2(net, two);
  EXPECT_EQ(m2.candidates(at(10, 30, 0)).size(), 2u);
}

TEST(MapMatcher, RouteDistanceAlongTheNetwork) {
  const auto net = t_junction();
  MapMatcher m(net, MatchConfig{});
  const Candidate a{net.segment_index(SegmentId{1}), 100.0, 0.0};
  const Candidate b{net.segment_index(SegmentId{3}), 200.0, 0.0};
  EXPECT_NEAR(m.route_distance_m(a, b), 400.0 + 200.0, 1e-9);
  const Candidate c{net.segment_index(SegmentId{1}), 300.0, 0.0};
  EXPECT_NEAR(m.route_distance_m(a, c), 200.0, 1e-9);
  EXPECT_EQ(m.route_distance_m(c, a), std::numeric_limits<double>::infinity());
}

TEST(MapMatcher, TwoByTwoLatticeMatchesEnumeration) {
  MatchLattice lat;
  lat.candidates = {std::vector<Candidate>(2), std::vector<Candidate>(2)};
  lat.emission = {{-1.0, -0.5}, {-0.2, -3.0}};
  lat.transition = {{}, {{-0.1, -2.0}, {-4.0, -0.1}}};
  const auto want = oracle::enumerate_lattice(lat);
  ASSERT_TRUE(want);
  EXPECT_EQ(MapMatcher::decode(lat), want->states);
  EXPECT_EQ(want->states, (std::vector<std::size_t>{0, 0}));
}

TEST(MapMatcher, TiesGoToTheLowerIndex) {
  MatchLattice lat;
  lat.candidates = {std::vector<Candidate>(2), std::vector<Candidate>(2)};
  lat.emission = {{-1.0, -1.0}, {-1.0, -1.0}};
  lat.transition = {{}, {{-1.0, -1.0}, {-1.0, -1.0}}};
  EXPECT_EQ(MapMatcher::decode(lat), (std::vector<std::size_t>{0, 0}));
}

TEST(MapMatcher, UnreachableLatticeIsUnmatched) {
  const double inf = std::numeric_limits<double>::infinity();
  MatchLattice lat;
  lat.candidates = {std::vector<Candidate>(1), std::vector<Candidate>(1)};
  lat.emission = {{-1.0}, {-1.0}};
  lat.transition = {{}, {{-inf}}};
  try {
    MapMatcher::decode(lat);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unmatched_point);
  }
}

TEST(MapMatcher, PerturbedPointOnTJunctionKeepsTheTruePath) {
  const auto net = t_junction();
  // Driving west -> center -> north; the fix 40 m up the north road is pushed
  // 20 m east, towards the east road.
  const std::vector<GpsPoint> pts{at(-400, 0, 0), at(-250, 0, 10), at(-100, 0, 20),
                                  at(20, 40, 30), at(0, 180, 40), at(0, 330, 50)};
  MapMatcher m(net, MatchConfig{});
  const auto lattice = m.build_lattice(pts);
  const auto want = oracle::enumerate_lattice(lattice);
  ASSERT_TRUE(want);
  EXPECT_EQ(MapMatcher::decode(lattice), want->states);
  const auto atr = m.match(pts, "t");
  ASSERT_EQ(atr.steps.size(), 2u);
  EXPECT_EQ(atr.steps[0].segment, SegmentId{1});
  EXPECT_EQ(atr.steps[1].segment, SegmentId{3});
  EXPECT_GT(atr.steps[1].t, 20.0);
  EXPECT_LE(atr.steps[1].t, 30.0);
}

TEST(MapMatcher, RejectsBadInput) {
  const auto net = t_junction();
  MapMatcher m(net, MatchConfig{});
  const std::vector<GpsPoint> one{at(-400, 0, 0)};
  EXPECT_THROW(m.match(one), Error);
  const std::vector<GpsPoint> same_time{at(-400, 0, 0), at(-300, 0, 0)};
  EXPECT_THROW(m.match(same_time), Error);
  const std::vector<GpsPoint> far{at(-400, 0, 0), at(0, -2000, 10)};
  EXPECT_THROW(m.match(far), Error);
  MatchConfig bad;
  bad.emission_sigma_m = 0.0;
  EXPECT_THROW(MapMatcher(net, bad), Error);
}

TEST(MapMatcher, NoiselessSimulatedTripsRecoverTheirSegments) {
  SimConfig cfg;
  cfg.rows = 6;
  cfg.cols = 6;
  cfg.n_trips = 30;
  cfg.seed = 77;
  const auto net = generate_network(cfg);
  const auto trips = generate_trips(net, cfg);
  MapMatcher m(net, MatchConfig{});
  std::size_t exact = 0;
  for (const auto& t : trips) {
    const auto atr = m.match(t.record.raw_gps);
    std::vector<SegmentId> got;
    for (const auto& s : atr.steps) got.push_back(s.segment);
    if (got == t.truth.segments) ++exact;
  }
  EXPECT_EQ(exact, trips.size());
}

TEST(MapMatcher, ViterbiEqualsEnumerationOnNoisyFixtures) {
  SimConfig cfg;
  cfg.rows = 5;
  cfg.cols = 5;
  cfg.n_trips = 20;
  cfg.seed = 78;
  cfg.gps_noise_m = 20.0;
  const auto net = generate_network(cfg);
  const auto trips = generate_trips(net, cfg);
  MatchConfig mc;
  mc.max_candidates = 4;
  MapMatcher m(net, mc);
  std::mt19937_64 rng(79);
  int checked = 0;
  for (const auto& t : trips) {
    const auto& gps = t.record.raw_gps;
    for (int r = 0; r < 3; ++r) {
      const std::size_t len = 2 + rng() % 5;
      if (gps.size() < len) continue;
      const auto lattice = m.build_lattice(std::span(gps).subspan(rng() % (gps.size() - len + 1), len));
      const auto want = oracle::enumerate_lattice(lattice);
      if (!want) continue;
      EXPECT_EQ(MapMatcher::decode(lattice), want->states);
      ++checked;
    }
  }
  EXPECT_GT(checked, 30);
}

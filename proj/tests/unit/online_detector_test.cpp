#include "oracles.hpp"

#include "detour/error.hpp"
#include "detour/online_detector.hpp"
#include "detour/simulator.hpp"

#include <gtest/gtest.h>

using namespace detour;

namespace {

const LogitModel kBeijing{-8.8620, 41.5258, 28.5575, "beijing", 0.0};
constexpr double kT0 = 1543622400.0 + 9 * 3600.0;

// Initial plan 1 -> 2 -> 3 into destination 4 (4 km, 4 min at 60 km/h); the
// driver instead takes 5 -> 6 (1.5 + 2.5 km).
RoadNetwork fork_network() {
  return oracle::make_network(
      {{39.90, 116.40}, {39.91, 116.40}, {39.93, 116.40}, {39.94, 116.40},
       {39.95, 116.40}, {39.92, 116.42}},
      {{1, 2, 1.0, 60.0},
       {2, 3, 2.0, 60.0},
       {3, 4, 1.0, 60.0},
       {4, 5, 1.0, 60.0},
       {2, 6, 1.5, 60.0},
       {6, 4, 2.5, 60.0}});
}

const std::vector<AtrStep> kDriven{{SegmentId{1}, kT0},
                                   {SegmentId{5}, kT0 + 90},
                                   {SegmentId{6}, kT0 + 240},
                                   {SegmentId{4}, kT0 + 390}};

}  // namespace

TEST(OnlineScores, BeforeFirstStepIsSequencingError) {
  TripProgress p;
  try {
    online_scores(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::sequencing);
  }
}

TEST(OnlineScores, HandComputedFixture) {
  const auto net = fork_network();
  const OnlineDetector det(net, kBeijing);
  auto p = det.begin("f", SegmentId{4});
  std::vector<StepDecision> d;
  for (const auto& s : kDriven) d.push_back(det.step(p, s));
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(p.initial_plan.path, (std::vector<SegmentId>{SegmentId{1}, SegmentId{2}, SegmentId{3}}));
  EXPECT_EQ(d[0].x.x1, 0.0);
  EXPECT_EQ(d[0].x.x2, 0.0);
  // Step 2: 1 km done, 4 km left on [5, 6]; 1.5 min elapsed plus 4 planned.
  EXPECT_DOUBLE_EQ(d[1].x.x1, 0.25);
  EXPECT_DOUBLE_EQ(d[1].x.x2, 0.375);
  // Step 3: 2.5 km done plus 2.5 left; 4 min elapsed plus 2.5.
  EXPECT_DOUBLE_EQ(d[2].x.x1, 0.25);
  EXPECT_DOUBLE_EQ(d[2].x.x2, 0.625);
  EXPECT_DOUBLE_EQ(d[3].x.x1, 0.25);
  EXPECT_DOUBLE_EQ(d[3].x.x2, 0.625);
  EXPECT_EQ(d[0].action, WarningAction::none);
  EXPECT_EQ(d[1].action, WarningAction::warn_issued);
  EXPECT_EQ(d[2].action, WarningAction::warn_maintained);
  EXPECT_EQ(d[1].scenario, Scenario::worse);
  EXPECT_NEAR(d[1].theta, -8.8620 + 41.5258 * 0.25 + 28.5575 * 0.375, 1e-12);
}

TEST(OnlineScores, WarningCancelsWhenTheScoreRecovers) {
  const auto net = fork_network();
  const OnlineDetector det(net, kBeijing);
  auto p = det.begin("f", SegmentId{4});
  det.step(p, kDriven[0]);
  EXPECT_EQ(det.step(p, kDriven[1]).action, WarningAction::warn_issued);
  // A plan claiming only 0.5 km / 0.5 min remain pulls the score back.
  const RoutePlanStep optimistic{{SegmentId{6}}, kDriven[2].t, 0.5, 0.5};
  const auto d = det.step(p, kDriven[2], optimistic);
  EXPECT_DOUBLE_EQ(d.x.x1, -0.25);
  EXPECT_EQ(d.action, WarningAction::warn_cancelled);
  EXPECT_EQ(d.scenario, Scenario::shorter_but_slower);
  EXPECT_FALSE(p.warning_active);
}

TEST(OnlineDetector, RejectsDiscontinuousSteps) {
  const auto net = fork_network();
  const OnlineDetector det(net, kBeijing);
  auto p = det.begin("f", SegmentId{4});
  det.step(p, kDriven[0]);
  EXPECT_THROW(det.step(p, {SegmentId{3}, kT0 + 60}), Error);
  EXPECT_THROW(det.step(p, {SegmentId{2}, kT0}), Error);
  EXPECT_THROW(det.begin("g", SegmentId{99}), Error);
}

TEST(ClassifyScenario, SignPatterns) {
  EXPECT_EQ(classify_scenario({0.1, 0.1}), Scenario::worse);
  EXPECT_EQ(classify_scenario({0.1, -0.1}), Scenario::longer_but_faster);
  EXPECT_EQ(classify_scenario({-0.1, 0.1}), Scenario::shorter_but_slower);
  EXPECT_EQ(classify_scenario({-0.1, -0.1}), Scenario::better);
  EXPECT_EQ(classify_scenario({0.0, 0.3}), Scenario::mixed_zero);
}

TEST(OnlineDetector, ReplayMatchesOfflineFeatures) {
  SimConfig cfg;
  cfg.n_trips = 300;
  cfg.behavior_mix = {0.6, 0.2, 0.1, 0.1};
  const auto net = generate_network(cfg);
  const OnlineDetector det(net, kBeijing);
  for (const auto& t : generate_trips(net, cfg)) {
    const auto d = det.replay(t.record);
    const auto off = offline_features(net, t.record);
    EXPECT_NEAR(d.back().x.x1, off.x1, 1e-9);
    EXPECT_NEAR(d.back().x.x2, off.x2, 1e-9);
  }
}

TEST(OnlineDetector, LiveReplanningAgreesWithStoredPlans) {
  SimConfig cfg;
  cfg.n_trips = 60;
  cfg.behavior_mix = {0.5, 0.5, 0.0, 0.0};
  const auto net = generate_network(cfg);
  const OnlineDetector det(net, kBeijing, cfg.weights);
  for (const auto& t : generate_trips(net, cfg)) {
    auto p = det.begin(t.record.trip_id, t.record.atr.steps.back().segment);
    const auto stored = det.replay(t.record);
    for (std::size_t i = 0; i < t.record.atr.steps.size(); ++i) {
      const auto d = det.step(p, t.record.atr.steps[i]);
      EXPECT_EQ(d.theta, stored[i].theta);
    }
  }
}

TEST(OnlineDetector, NormalTripsNeverWarn) {
  SimConfig cfg;
  cfg.n_trips = 100;
  const auto net = generate_network(cfg);
  const OnlineDetector det(net, kBeijing);
  for (const auto& t : generate_trips(net, cfg)) {
    for (const auto& d : det.replay(t.record)) {
      EXPECT_EQ(d.action, WarningAction::none);
      EXPECT_EQ(d.theta, kBeijing.beta0);
    }
  }
}

TEST(OnlineDetector, PlantedDetourWarnsAtTheBoundaryCrossing) {
  SimConfig cfg;
  cfg.n_trips = 100;
  cfg.behavior_mix = {0.0, 1.0, 0.0, 0.0};
  cfg.detour_inflation = 0.5;
  const auto net = generate_network(cfg);
  const OnlineDetector det(net, kBeijing);
  std::size_t warned = 0;
  for (const auto& t : generate_trips(net, cfg)) {
    if (t.truth.behavior != Behavior::detour) continue;
    const auto d = det.replay(t.record);
    std::size_t first = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const bool crossed = 41.5258 * d[i].x.x1 + 28.5575 * d[i].x.x2 > 8.8620;
      if (crossed && first == 0) {
        first = i + 1;
        EXPECT_EQ(d[i].action, WarningAction::warn_issued);
      }
      if (first == 0) EXPECT_EQ(d[i].action, WarningAction::none);
    }
    EXPECT_GT(first, 1u);
    warned += first > 0 ? 1 : 0;
  }
  EXPECT_GT(warned, 90u);
}

TEST(OnlineDetector, AvoidCongestionIsLongerButFaster) {
  SimConfig cfg;
  cfg.n_trips = 100;
  cfg.behavior_mix = {0.0, 0.0, 1.0, 0.0};
  const auto net = generate_network(cfg);
  const OnlineDetector det(net, kBeijing);
  std::size_t seen = 0;
  for (const auto& t : generate_trips(net, cfg)) {
    if (t.truth.behavior != Behavior::avoid_congestion) continue;
    ++seen;
    const auto d = det.replay(t.record);
    EXPECT_EQ(d.back().scenario, Scenario::longer_but_faster) << t.record.trip_id;
  }
  EXPECT_GT(seen, 0u);
}

TEST(StageAuc, LastStageEqualsOfflineAuc) {
  SimConfig cfg;
  cfg.n_trips = 400;
  cfg.behavior_mix = {0.8, 0.1, 0.05, 0.05};
  const auto net = generate_network(cfg);
  const auto records = records_of(generate_trips(net, cfg));
  const LogitModel model{-2.0, 5.0, 3.0, "", 0.0};
  const auto report = stage_auc(net, records, model);
  EXPECT_NEAR(report.auc[9], evaluate_roc_auc(model, labeled_features(net, records)).auc, 1e-12);
  for (std::size_t k = 1; k < 10; ++k) EXPECT_GE(report.warned[k], report.warned[k - 1]);
  const auto csv = stage_report_csv(report);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "stage,auc,warned_count");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
}

TEST(StageAuc, LateDetoursScoreLowerEarly) {
  SimConfig cfg;
  cfg.n_trips = 600;
  cfg.behavior_mix = {0.8, 0.2, 0.0, 0.0};
  const auto net = generate_network(cfg);
  const auto records = records_of(generate_trips(net, cfg));
  const auto report = stage_auc(net, records, kBeijing);
  EXPECT_LE(report.auc[0], report.auc[9]);
  EXPECT_EQ(report.auc[9], 1.0);
}

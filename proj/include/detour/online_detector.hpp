#pragma once

#include "detour/map_matching.hpp"
#include "detour/offline_classifier.hpp"
#include "detour/road_network.hpp"
#include "detour/routing.hpp"
#include "detour/trip.hpp"

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace detour {

enum class WarningAction { none, warn_issued, warn_maintained, warn_cancelled };
enum class Scenario { worse, longer_but_faster, shorter_but_slower, better, mixed_zero };

std::string_view to_string(WarningAction a);
std::string_view to_string(Scenario s);

/// Sign pattern of (x1, x2); any zero component gives mixed_zero.
Scenario classify_scenario(FeatureVector x);

struct StepDecision {
  std::size_t step = 0;  // 1-based index of the segment just entered
  FeatureVector x;
  double theta = 0.0;
  WarningAction action = WarningAction::none;
  Scenario scenario = Scenario::mixed_zero;
};

/// Live state of one trip.
struct TripProgress {
  std::string trip_id;
  SegmentId destination;
  AbstractTrajectory steps_seen;
  double prefix_km = 0.0;  // Dis(atr(s_1, s_i))
  RoutePlanStep initial_plan;
  RoutePlanStep current_plan;
  bool warning_active = false;
  std::vector<StepDecision> history;
};

/// x1_i, x2_i: travelled prefix plus the current plan's remainder, relative to
/// the initial plan. Throws ErrorKind::sequencing before the first step.
FeatureVector online_scores(const TripProgress& progress);

class OnlineDetector {
 public:
  OnlineDetector(const RoadNetwork& net, LogitModel model, RoutingWeights w = {});

  TripProgress begin(std::string trip_id, SegmentId destination) const;

  /// Enters `next`, re-plans from it and updates the warning state. Throws
  /// ErrorKind::structural if `next` does not continue the trajectory.
  StepDecision step(TripProgress& progress, const AtrStep& next) const;

  /// As step(), with the plan r(next, destination, next.t) supplied by the
  /// caller instead of recomputed.
  StepDecision step(TripProgress& progress, const AtrStep& next, const RoutePlanStep& plan) const;

  /// Replays a recorded trip using its stored plans.
  std::vector<StepDecision> replay(const TripRecord& trip) const;

  const LogitModel& model() const { return model_; }

 private:
  const RoadNetwork& net_;
  LogitModel model_;
  RoutingWeights weights_;
};

struct StageReport {
  std::array<double, 10> auc{};
  std::array<std::size_t, 10> warned{};
};

/// Stage k scores each trip by theta at step ceil(k * n / 10); warned[k]
/// counts trips with a warning issued at or before that step.
StageReport stage_auc(const RoadNetwork& net, std::span<const TripRecord> trips,
                      const LogitModel& model);

std::string stage_report_csv(const StageReport& report);

}  // namespace detour

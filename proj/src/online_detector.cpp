#include "detour/online_detector.hpp"

#include "detour/error.hpp"

#include <cmath>
#include <cstdio>

namespace detour {

std::string_view to_string(WarningAction a) {
  switch (a) {
    case WarningAction::none: return "none";
    case WarningAction::warn_issued: return "warn_issued";
    case WarningAction::warn_maintained: return "warn_maintained";
    case WarningAction::warn_cancelled: return "warn_cancelled";
  }
  return "none";
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::worse: return "worse";
    case Scenario::longer_but_faster: return "longer_but_faster";
    case Scenario::shorter_but_slower: return "shorter_but_slower";
    case Scenario::better: return "better";
    case Scenario::mixed_zero: return "mixed_zero";
  }
  return "mixed_zero";
}

Scenario classify_scenario(FeatureVector x) {
  if (x.x1 > 0.0 && x.x2 > 0.0) return Scenario::worse;
  if (x.x1 > 0.0 && x.x2 < 0.0) return Scenario::longer_but_faster;
  if (x.x1 < 0.0 && x.x2 > 0.0) return Scenario::shorter_but_slower;
  if (x.x1 < 0.0 && x.x2 < 0.0) return Scenario::better;
  return Scenario::mixed_zero;
}

FeatureVector online_scores(const TripProgress& p) {
  if (p.steps_seen.steps.empty()) {
    throw Error(ErrorKind::sequencing, "trip " + p.trip_id + " has not entered a segment yet");
  }
  const double elapsed_min = actual_travel_time_min(p.steps_seen);
  return feature_ratios(p.prefix_km + p.current_plan.distance_km,
                        elapsed_min + p.current_plan.est_time_min, p.initial_plan.distance_km,
                        p.initial_plan.est_time_min);
}

OnlineDetector::OnlineDetector(const RoadNetwork& net, LogitModel model, RoutingWeights w)
    : net_(net), model_(std::move(model)), weights_(w) {
  weights_.validate();
}

TripProgress OnlineDetector::begin(std::string trip_id, SegmentId destination) const {
  if (!net_.has_segment(destination)) {
    throw Error(ErrorKind::input, "unknown destination segment " + std::to_string(destination.value));
  }
  TripProgress p;
  p.trip_id = std::move(trip_id);
  p.destination = destination;
  p.steps_seen.trip_id = p.trip_id;
  return p;
}

StepDecision OnlineDetector::step(TripProgress& progress, const AtrStep& next) const {
  if (!net_.has_segment(next.segment)) {
    throw Error(ErrorKind::structural, "unknown segment " + std::to_string(next.segment.value));
  }
  return step(progress, next,
              route_plan(net_, next.segment, progress.destination, next.t, weights_));
}

StepDecision OnlineDetector::step(TripProgress& progress, const AtrStep& next,
                                  const RoutePlanStep& plan) const {
  auto& steps = progress.steps_seen.steps;
  if (!net_.has_segment(next.segment)) {
    throw Error(ErrorKind::structural, "unknown segment " + std::to_string(next.segment.value));
  }
  if (!steps.empty()) {
    const auto& prev = steps.back();
    if (net_.segment(prev.segment).to != net_.segment(next.segment).from) {
      throw Error(ErrorKind::structural, "trip " + progress.trip_id + ": segment " +
                                             std::to_string(next.segment.value) +
                                             " does not continue from " +
                                             std::to_string(prev.segment.value));
    }
    if (!(next.t > prev.t)) {
      throw Error(ErrorKind::structural,
                  "trip " + progress.trip_id + ": timestamps must strictly increase");
    }
  }
  if (!steps.empty()) progress.prefix_km += net_.segment(steps.back().segment).length_km;
  steps.push_back(next);
  progress.current_plan = plan;
  if (steps.size() == 1) progress.initial_plan = plan;

  StepDecision d;
  d.step = steps.size();
  d.x = online_scores(progress);
  d.theta = log_odds(model_, d.x);
  d.scenario = classify_scenario(d.x);
  if (d.theta > 0.0) {
    d.action = progress.warning_active ? WarningAction::warn_maintained : WarningAction::warn_issued;
    progress.warning_active = true;
  } else {
    d.action = progress.warning_active ? WarningAction::warn_cancelled : WarningAction::none;
    progress.warning_active = false;
  }
  progress.history.push_back(d);
  return d;
}

std::vector<StepDecision> OnlineDetector::replay(const TripRecord& trip) const {
  if (trip.plans.size() != trip.atr.steps.size() || trip.atr.steps.empty()) {
    throw Error(ErrorKind::structural, "trip " + trip.trip_id + " needs one plan per step");
  }
  auto progress = begin(trip.trip_id, trip.atr.steps.back().segment);
  for (std::size_t i = 0; i < trip.atr.steps.size(); ++i) {
    step(progress, trip.atr.steps[i], trip.plans[i]);
  }
  return std::move(progress.history);
}

StageReport stage_auc(const RoadNetwork& net, std::span<const TripRecord> trips,
                      const LogitModel& model) {
  OnlineDetector detector(net, model);
  std::array<std::vector<double>, 10> scores;
  std::vector<int> labels;
  StageReport report;
  for (const auto& trip : trips) {
    if (trip.label == TripLabel::unlabeled) continue;
    const auto history = detector.replay(trip);
    const std::size_t n = history.size();
    std::size_t first_warning = n + 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (history[i].theta > 0.0) {
        first_warning = i + 1;
        break;
      }
    }
    for (std::size_t k = 1; k <= 10; ++k) {
      const std::size_t idx = (k * n + 9) / 10;
      scores[k - 1].push_back(history[idx - 1].theta);
      if (first_warning <= idx) ++report.warned[k - 1];
    }
    labels.push_back(trip.label == TripLabel::detour ? 1 : 0);
  }
  for (std::size_t k = 0; k < 10; ++k) report.auc[k] = roc_auc(scores[k], labels).auc;
  return report;
}

std::string stage_report_csv(const StageReport& report) {
  std::string out = "stage,auc,warned_count\n";
  char buf[96];
  for (std::size_t k = 0; k < 10; ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%zu\n", k + 1, report.auc[k], report.warned[k]);
    out += buf;
  }
  return out;
}

}  // namespace detour

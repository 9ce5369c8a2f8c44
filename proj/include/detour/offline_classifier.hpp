#pragma once

#include "detour/road_network.hpp"
#include "detour/trip.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace detour {

/// (X1, X2): relative excess distance and relative excess time over a plan.
struct FeatureVector {
  double x1 = 0.0;
  double x2 = 0.0;
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Ratios within this distance of zero are reported as exactly zero; they are
/// rounding residue from summing the same segments in two different groupings.
inline constexpr double kRatioSnap = 1e-9;

/// actual/plan - 1 for distance and time. Throws ErrorKind::degenerate_plan
/// unless both plan quantities are positive.
FeatureVector feature_ratios(double actual_km, double actual_min, double plan_km,
                             double plan_min);

/// Features of a completed trip against its initial plan r(s_1, s_n, t_1).
FeatureVector offline_features(const RoadNetwork& net, const TripRecord& trip);

struct LogitModel {
  double beta0 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  std::string trained_on;
  double ridge = 0.0;
  friend bool operator==(const LogitModel&, const LogitModel&) = default;
};

double log_odds(const LogitModel& model, FeatureVector fv);

/// P(detour) = 1 / (1 + exp(-theta)).
double probability(double theta);

struct LabeledFeature {
  FeatureVector x;
  int y = 0;  // 1 = detour
};

using Beta = std::array<double, 3>;

/// Log-likelihood minus ridge/2 * (beta1^2 + beta2^2).
double log_likelihood(std::span<const LabeledFeature> data, const Beta& beta, double ridge = 0.0);
Beta log_likelihood_gradient(std::span<const LabeledFeature> data, const Beta& beta,
                             double ridge = 0.0);

struct TrainOptions {
  double ridge = 0.0;
  double tolerance = 1e-8;  // on the gradient infinity-norm
  int max_iterations = 10000;
  friend bool operator==(const TrainOptions&, const TrainOptions&) = default;
};

struct TrainReport {
  LogitModel model;
  double final_log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  Beta standard_errors{};
  Beta z_values{};
  bool separated = false;  // a hyperplane splits the classes; no finite MLE without ridge
  std::string diagnostic;
};

/// Maximizes the (optionally ridge-penalized) log-likelihood by gradient
/// ascent. Throws ErrorKind::non_identifiable when only one class is present.
TrainReport train(std::span<const LabeledFeature> data, const TrainOptions& opts = {});

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocResult {
  double auc = 0.0;
  std::vector<RocPoint> roc;
};

/// ROC by sweeping thresholds from the highest score down, tied scores
/// entering together; AUC by the trapezoid rule. Throws
/// ErrorKind::undefined_auc unless both labels occur.
RocResult roc_auc(std::span<const double> scores, std::span<const int> labels);

RocResult evaluate_roc_auc(const LogitModel& model, std::span<const LabeledFeature> data);

/// Labeled trips only; unlabeled records are skipped.
std::vector<LabeledFeature> labeled_features(const RoadNetwork& net,
                                             std::span<const TripRecord> trips);

/// Deterministic assignment of record `index` to the training side.
bool in_training_split(std::uint64_t seed, std::size_t index, double train_fraction);

std::string model_to_json(const LogitModel& model);
LogitModel model_from_json(const std::string& text);
LogitModel load_model(const std::filesystem::path& path);
void save_model(const LogitModel& model, const std::filesystem::path& path);

std::string train_report_to_json(const TrainReport& report);

}  // namespace detour

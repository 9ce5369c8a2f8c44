#include "detour/offline_classifier.hpp"

#include "detour/error.hpp"
#include "detour/io.hpp"
#include "detour/simulator.hpp"

#include <Eigen/Dense>

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace detour {

namespace {

using json = nlohmann::ordered_json;

double snap(double r) { return std::abs(r) <= kRatioSnap ? 0.0 : r; }

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double theta_of(const Beta& b, const FeatureVector& x) { return b[0] + b[1] * x.x1 + b[2] * x.x2; }

double inf_norm(const Beta& g) {
  return std::max({std::abs(g[0]), std::abs(g[1]), std::abs(g[2])});
}

double dot(const Beta& a, const Beta& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Beta axpy(const Beta& x, double a, const Beta& d) {
  return {x[0] + a * d[0], x[1] + a * d[1], x[2] + a * d[2]};
}

bool classes_present(std::span<const LabeledFeature> data) {
  bool pos = false;
  bool neg = false;
  for (const auto& d : data) (d.y == 1 ? pos : neg) = true;
  return pos && neg;
}

}  // namespace

FeatureVector feature_ratios(double actual_km, double actual_min, double plan_km,
                             double plan_min) {
  if (!(plan_km > 0.0) || !(plan_min > 0.0)) {
    throw Error(ErrorKind::degenerate_plan, "initial plan has zero distance or time");
  }
  return {snap(actual_km / plan_km - 1.0), snap(actual_min / plan_min - 1.0)};
}

FeatureVector offline_features(const RoadNetwork& net, const TripRecord& trip) {
  if (trip.plans.empty()) {
    throw Error(ErrorKind::degenerate_plan, "trip " + trip.trip_id + " has no initial plan");
  }
  const auto& plan = trip.plans.front();
  return feature_ratios(trajectory_distance(net, trip.atr), actual_travel_time_min(trip.atr),
                        plan.distance_km, plan.est_time_min);
}

double log_odds(const LogitModel& model, FeatureVector fv) {
  return model.beta0 + model.beta1 * fv.x1 + model.beta2 * fv.x2;
}

double probability(double theta) {
  if (theta >= 0.0) return 1.0 / (1.0 + std::exp(-theta));
  const double e = std::exp(theta);
  return e / (1.0 + e);
}

double log_likelihood(std::span<const LabeledFeature> data, const Beta& beta, double ridge) {
  double ll = 0.0;
  for (const auto& d : data) {
    const double t = theta_of(beta, d.x);
    ll += (d.y == 1 ? t : 0.0) - softplus(t);
  }
  return ll - 0.5 * ridge * (beta[1] * beta[1] + beta[2] * beta[2]);
}

Beta log_likelihood_gradient(std::span<const LabeledFeature> data, const Beta& beta,
                             double ridge) {
  Beta g{0.0, 0.0, 0.0};
  for (const auto& d : data) {
    const double r = d.y - probability(theta_of(beta, d.x));
    g[0] += r;
    g[1] += r * d.x.x1;
    g[2] += r * d.x.x2;
  }
  g[1] -= ridge * beta[1];
  g[2] -= ridge * beta[2];
  return g;
}

TrainReport train(std::span<const LabeledFeature> data, const TrainOptions& opts) {
  if (!classes_present(data)) {
    throw Error(ErrorKind::non_identifiable, "training data must contain both classes");
  }
  if (!(opts.ridge >= 0.0) || !(opts.tolerance > 0.0) || opts.max_iterations <= 0) {
    throw Error(ErrorKind::config, "invalid training options");
  }

  Beta beta{0.0, 0.0, 0.0};
  double ll = log_likelihood(data, beta, opts.ridge);
  Beta g = log_likelihood_gradient(data, beta, opts.ridge);
  // Initial step from the curvature bound of the logistic loss: p(1-p) <= 1/4.
  double scale = 0.0;
  for (const auto& d : data) scale += 1.0 + d.x.x1 * d.x.x1 + d.x.x2 * d.x.x2;
  double step = 4.0 / scale;

  TrainReport report;
  int it = 0;
  for (; it < opts.max_iterations && inf_norm(g) >= opts.tolerance; ++it) {
    const double gg = dot(g, g);
    double alpha = step;
    Beta next{};
    Beta g_next{};
    double ll_next = 0.0;
    bool accepted = false;
    for (int halvings = 0; halvings < 80; ++halvings, alpha *= 0.5) {
      next = axpy(beta, alpha, g);
      ll_next = log_likelihood(data, next, opts.ridge);
      g_next = log_likelihood_gradient(data, next, opts.ridge);
      // Sufficient increase, or a non-negative slope at the trial point: by
      // concavity the step has then not passed the line maximum.
      if (ll_next >= ll + 1e-4 * alpha * gg || dot(g_next, g) >= 0.0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    // Barzilai-Borwein step for the next iteration.
    const Beta s{next[0] - beta[0], next[1] - beta[1], next[2] - beta[2]};
    const Beta y{g_next[0] - g[0], g_next[1] - g[1], g_next[2] - g[2]};
    const double sy = dot(s, y);
    step = sy < 0.0 ? dot(s, s) / -sy : 2.0 * alpha;
    if (!std::isfinite(step) || step <= 0.0) step = alpha;
    beta = next;
    g = g_next;
    ll = ll_next;
  }

  report.model = {beta[0], beta[1], beta[2], {}, opts.ridge};
  report.final_log_likelihood = log_likelihood(data, beta, opts.ridge);
  report.iterations = it;
  report.gradient_norm = inf_norm(g);
  report.converged = report.gradient_norm < opts.tolerance;

  report.separated = std::all_of(data.begin(), data.end(), [&](const LabeledFeature& d) {
    const double t = theta_of(beta, d.x);
    return d.y == 1 ? t > 0.0 : t < 0.0;
  });
  if (report.separated && opts.ridge == 0.0) {
    report.converged = false;
    report.diagnostic =
        "classes are linearly separable; coefficients diverge without a ridge penalty";
  } else if (!report.converged) {
    report.diagnostic = "iteration limit reached before the gradient tolerance";
  }

  Eigen::Matrix3d info = Eigen::Matrix3d::Zero();
  for (const auto& d : data) {
    const double p = probability(theta_of(beta, d.x));
    const Eigen::Vector3d x(1.0, d.x.x1, d.x.x2);
    info += p * (1.0 - p) * x * x.transpose();
  }
  info(1, 1) += opts.ridge;
  info(2, 2) += opts.ridge;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(info);
  if (lu.isInvertible()) {
    const Eigen::Matrix3d cov = lu.inverse();
    for (int k = 0; k < 3; ++k) {
      report.standard_errors[k] = std::sqrt(std::max(0.0, cov(k, k)));
      report.z_values[k] = beta[k] / report.standard_errors[k];
    }
  } else {
    report.standard_errors.fill(std::numeric_limits<double>::infinity());
    report.z_values.fill(0.0);
  }
  return report;
}

RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::input, "scores and labels differ in length");
  }
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorKind::undefined_auc, "AUC needs both positive and negative examples");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult out;
  out.roc.push_back({0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  double area2 = 0.0;  // twice the area in units of (fp, tp) counts
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    std::size_t dtp = 0;
    std::size_t dfp = 0;
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? dtp : dfp)++;
    area2 += static_cast<double>(dfp) * static_cast<double>(2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    out.roc.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                       static_cast<double>(tp) / static_cast<double>(pos)});
  }
  out.auc = area2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return out;
}

RocResult evaluate_roc_auc(const LogitModel& model, std::span<const LabeledFeature> data) {
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(data.size());
  labels.reserve(data.size());
  for (const auto& d : data) {
    scores.push_back(log_odds(model, d.x));
    labels.push_back(d.y);
  }
  return roc_auc(scores, labels);
}

std::vector<LabeledFeature> labeled_features(const RoadNetwork& net,
                                             std::span<const TripRecord> trips) {
  std::vector<LabeledFeature> out;
  out.reserve(trips.size());
  for (const auto& t : trips) {
    if (t.label == TripLabel::unlabeled) continue;
    out.push_back({offline_features(net, t), t.label == TripLabel::detour ? 1 : 0});
  }
  return out;
}

bool in_training_split(std::uint64_t seed, std::size_t index, double train_fraction) {
  const auto h = derive_seed(seed, index);
  return static_cast<double>(h >> 11) * 0x1.0p-53 < train_fraction;
}

std::string model_to_json(const LogitModel& model) {
  json j = {{"beta0", model.beta0},
            {"beta1", model.beta1},
            {"beta2", model.beta2},
            {"trained_on", model.trained_on},
            {"ridge", model.ridge}};
  return j.dump(1) + "\n";
}

LogitModel model_from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    LogitModel m;
    m.beta0 = j.at("beta0").get<double>();
    m.beta1 = j.at("beta1").get<double>();
    m.beta2 = j.at("beta2").get<double>();
    m.trained_on = j.value("trained_on", std::string{});
    m.ridge = j.value("ridge", 0.0);
    if (!std::isfinite(m.beta0) || !std::isfinite(m.beta1) || !std::isfinite(m.beta2)) {
      throw Error(ErrorKind::input, "model coefficients must be finite");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("model file: ") + e.what());
  }
}

LogitModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

void save_model(const LogitModel& model, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(model));
}

std::string train_report_to_json(const TrainReport& r) {
  auto num = [](double x) -> json { return std::isfinite(x) ? json(x) : json(nullptr); };
  json coef = json::array();
  const Beta b{r.model.beta0, r.model.beta1, r.model.beta2};
  for (int k = 0; k < 3; ++k) {
    coef.push_back({{"name", "beta" + std::to_string(k)},
                    {"estimate", b[k]},
                    {"std_error", num(r.standard_errors[k])},
                    {"z", num(r.z_values[k])}});
  }
  json j = {{"coefficients", std::move(coef)},
            {"log_likelihood", r.final_log_likelihood},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"gradient_norm", r.gradient_norm},
            {"separated", r.separated},
            {"diagnostic", r.diagnostic}};
  return j.dump(1) + "\n";
}

}  // namespace detour

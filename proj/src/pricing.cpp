#include "detour/pricing.hpp"

#include "detour/error.hpp"
#include "detour/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace detour {

namespace {

using json = nlohmann::ordered_json;

struct PresetRow {
  double alpha1, alpha2, v;
};

FareSchedule make_preset(std::string city, double f0, double mu, double tau,
                         const std::array<PresetRow, 5>& rows) {
  static constexpr std::array<double, 6> kBounds = {0, 360, 720, 1020, 1260, 1440};
  FareSchedule s;
  s.city = std::move(city);
  s.f0 = f0;
  s.mu = mu;
  s.tau = tau;
  s.alpha3 = 0.5;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s.intervals.push_back({kBounds[i], kBounds[i + 1], rows[i].alpha1, rows[i].alpha2, rows[i].v,
                           std::nullopt});
  }
  return s;
}

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

std::string money(double x) { return fmt("%.2f", x); }
std::string full(double x) { return fmt("%.17g", x); }
std::string opt_full(const std::optional<double>& x) { return x ? full(*x) : "NA"; }

}  // namespace

void FareSchedule::validate() const {
  for (double x : {f0, mu, tau, alpha3}) {
    if (!(x >= 0.0)) throw Error(ErrorKind::config, "schedule parameters must be non-negative");
  }
  if (!(duty_minutes > 0.0)) throw Error(ErrorKind::config, "duty_minutes must be positive");
  if (intervals.empty()) throw Error(ErrorKind::config, "schedule has no intervals");
  double expect = 0.0;
  for (const auto& iv : intervals) {
    if (iv.start_min != expect || !(iv.end_min > iv.start_min)) {
      throw Error(ErrorKind::config, "schedule intervals must partition [0, 1440) in order");
    }
    for (double x : {iv.alpha1, iv.alpha2, iv.v}) {
      if (!(x >= 0.0)) throw Error(ErrorKind::config, "interval parameters must be non-negative");
    }
    if (iv.alpha4 && !(*iv.alpha4 >= 0.0)) {
      throw Error(ErrorKind::config, "alpha4 must be non-negative");
    }
    expect = iv.end_min;
  }
  if (expect != kMinutesPerDay) {
    throw Error(ErrorKind::config, "schedule intervals must end at minute 1440");
  }
}

std::size_t FareSchedule::interval_at(double minute) const {
  const double m = wrap_minute(minute);
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (m >= intervals[i].start_min && m < intervals[i].end_min) return i;
  }
  return intervals.size() - 1;
}

FareSchedule preset_schedule(const std::string& city) {
  if (city == "beijing") {
    return make_preset(city, 13, 3, 10,
                       {{{2.15, 0.80, 0.629}, {1.80, 0.80, 0.467}, {1.45, 0.40, 0.449},
                         {1.50, 0.80, 0.435}, {2.15, 0.80, 0.526}}});
  }
  if (city == "shanghai") {
    return make_preset(city, 14, 3, 10,
                       {{{3.20, 0.60, 0.581}, {2.30, 0.70, 0.382}, {2.30, 0.60, 0.418},
                         {2.30, 0.70, 0.359}, {3.20, 0.60, 0.483}}});
  }
  if (city == "guangzhou") {
    return make_preset(city, 11, 2, 4,
                       {{{2.60, 0.40, 0.612}, {2.50, 0.40, 0.442}, {1.90, 0.30, 0.415},
                         {2.30, 0.40, 0.409}, {2.60, 0.40, 0.478}}});
  }
  if (city == "shenzhen") {
    return make_preset(city, 12, 3, 8,
                       {{{2.90, 0.55, 0.593}, {2.05, 0.65, 0.397}, {2.05, 0.55, 0.373},
                         {2.30, 0.65, 0.403}, {2.95, 0.55, 0.457}}});
  }
  throw Error(ErrorKind::config, "unknown schedule preset '" + city + "'");
}

std::vector<std::string> preset_cities() { return {"beijing", "shanghai", "guangzhou", "shenzhen"}; }

std::string schedule_to_json(const FareSchedule& s) {
  json intervals = json::array();
  for (const auto& iv : s.intervals) {
    json j = {{"start_min", iv.start_min},
              {"end_min", iv.end_min},
              {"alpha1", iv.alpha1},
              {"alpha2", iv.alpha2},
              {"v", iv.v}};
    if (iv.alpha4) j["alpha4"] = *iv.alpha4;
    intervals.push_back(std::move(j));
  }
  json doc = {{"city", s.city},
              {"f0", s.f0},
              {"mu", s.mu},
              {"tau", s.tau},
              {"alpha3", s.alpha3},
              {"duty_minutes", s.duty_minutes},
              {"intervals", std::move(intervals)}};
  return doc.dump(1) + "\n";
}

FareSchedule schedule_from_json(const std::string& text) {
  FareSchedule s;
  try {
    const auto j = json::parse(text);
    s.city = j.value("city", std::string{});
    s.f0 = j.at("f0").get<double>();
    s.mu = j.at("mu").get<double>();
    s.tau = j.at("tau").get<double>();
    s.alpha3 = j.at("alpha3").get<double>();
    s.duty_minutes = j.value("duty_minutes", 60.0);
    for (const auto& iv : j.at("intervals")) {
      FareInterval f;
      f.start_min = iv.at("start_min").get<double>();
      f.end_min = iv.at("end_min").get<double>();
      f.alpha1 = iv.at("alpha1").get<double>();
      f.alpha2 = iv.at("alpha2").get<double>();
      f.v = iv.at("v").get<double>();
      if (iv.contains("alpha4")) f.alpha4 = iv.at("alpha4").get<double>();
      s.intervals.push_back(f);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("schedule file: ") + e.what());
  }
  s.validate();
  return s;
}

FareSchedule load_schedule(const std::filesystem::path& path) {
  return schedule_from_json(read_text_file(path));
}

void save_schedule(const FareSchedule& s, const std::filesystem::path& path) {
  write_text_file(path, schedule_to_json(s));
}

double fare(const FareSchedule& s, double distance_km, double duration_min, double start_minute) {
  const auto& iv = s.intervals[s.interval_at(start_minute)];
  return s.f0 + iv.alpha1 * positive_part(distance_km - s.mu) +
         iv.alpha2 * positive_part(duration_min - s.tau);
}

double trip_fare(const FareSchedule& s, const RoadNetwork& net, const TripRecord& trip) {
  return fare(s, trajectory_distance(net, trip.atr), actual_travel_time_min(trip.atr),
              minute_of_day(trip.start_time));
}

double detour_utility(const FareSchedule& s, std::size_t interval) {
  const auto& iv = s.intervals.at(interval);
  if (!iv.alpha4) {
    throw Error(ErrorKind::sequencing,
                "alpha4 of interval " + std::to_string(interval) + " is not computed yet");
  }
  return iv.alpha1 * iv.v + iv.alpha2 - s.alpha3 * iv.v - *iv.alpha4;
}

double compute_alpha4(double income_sum, std::size_t drivers, double duty_minutes) {
  if (drivers == 0) throw Error(ErrorKind::input, "alpha4 needs at least one driver");
  if (!(duty_minutes > 0.0)) throw Error(ErrorKind::config, "duty_minutes must be positive");
  return income_sum / (static_cast<double>(drivers) * duty_minutes);
}

std::optional<double> utility_intercept(double coefficient, double intercept) {
  if (coefficient == 0.0) return std::nullopt;
  return -intercept / coefficient;
}

RatioUtilityFit fit_ratio_utility(std::span<const UtilityRatioPoint> points) {
  if (points.size() < 3) throw Error(ErrorKind::input, "regression needs at least 3 points");
  const double n = static_cast<double>(points.size());
  double mu_u = 0.0;
  double mu_r = 0.0;
  for (const auto& p : points) {
    mu_u += p.utility;
    mu_r += p.detour_ratio;
  }
  mu_u /= n;
  mu_r /= n;
  double suu = 0.0;
  double sur = 0.0;
  double srr = 0.0;
  for (const auto& p : points) {
    const double du = p.utility - mu_u;
    const double dr = p.detour_ratio - mu_r;
    suu += du * du;
    sur += du * dr;
    srr += dr * dr;
  }
  const bool constant = std::all_of(points.begin(), points.end(),
                                    [&](const auto& p) { return p.utility == points[0].utility; });
  if (constant || suu == 0.0) {
    throw Error(ErrorKind::degenerate_fit, "utility is constant across points");
  }
  RatioUtilityFit fit;
  fit.coefficient = sur / suu;
  fit.intercept = mu_r - fit.coefficient * mu_u;
  fit.u0 = utility_intercept(fit.coefficient, fit.intercept);
  double ss_res = 0.0;
  for (const auto& p : points) {
    const double e = p.detour_ratio - (fit.intercept + fit.coefficient * p.utility);
    ss_res += e * e;
  }
  fit.r2 = srr == 0.0 ? 1.0 : 1.0 - ss_res / srr;
  return fit;
}

PriceAdjustment solve_price_adjustment(const AdjustmentInputs& in, double u0) {
  PriceAdjustment adj;
  if (!(in.mean_excess_km > 0.0) || !(in.v > 0.0) || !(in.drivers > 0.0) ||
      !(in.duty_minutes > 0.0)) {
    return adj;
  }
  const double u = in.alpha1 * in.v + in.alpha2 - in.alpha3 * in.v - in.alpha4;
  const double denom = in.v / in.mean_excess_km + in.trips / (in.duty_minutes * in.drivers);
  adj.solvable = true;
  adj.delta_f0 = (u - u0) / denom;
  adj.delta_alpha1 = -adj.delta_f0 / in.mean_excess_km;
  adj.delta_alpha4 = in.trips * adj.delta_f0 / (in.drivers * in.duty_minutes);
  return adj;
}

double revenue_residual(const AdjustmentInputs& in, const PriceAdjustment& adj) {
  const double before = in.f0 + in.alpha1 * in.mean_excess_km + in.alpha2 * in.mean_excess_min;
  const double after = (in.f0 + adj.delta_f0) + (in.alpha1 + adj.delta_alpha1) * in.mean_excess_km +
                       in.alpha2 * in.mean_excess_min;
  return after - before;
}

double utility_residual(const AdjustmentInputs& in, const PriceAdjustment& adj, double u0) {
  return (in.alpha1 + adj.delta_alpha1) * in.v + in.alpha2 - in.alpha3 * in.v -
         (in.alpha4 + adj.delta_alpha4) - u0;
}

std::vector<IntervalStats> interval_stats(const FareSchedule& s, const RoadNetwork& net,
                                          std::span<const TripRecord> trips) {
  s.validate();
  std::vector<IntervalStats> stats(s.intervals.size());
  std::vector<std::set<std::string>> drivers(s.intervals.size());
  for (std::size_t i = 0; i < stats.size(); ++i) stats[i].interval = i;
  for (const auto& t : trips) {
    const auto i = s.interval_at(minute_of_day(t.start_time));
    auto& st = stats[i];
    const double d = trajectory_distance(net, t.atr);
    const double m = actual_travel_time_min(t.atr);
    ++st.trip_count;
    if (t.label == TripLabel::detour) ++st.detour_count;
    drivers[i].insert(t.driver_id);
    st.total_income += fare(s, d, m, minute_of_day(t.start_time));
    st.mean_excess_km += positive_part(d - s.mu);
    st.mean_excess_min += positive_part(m - s.tau);
  }
  for (std::size_t i = 0; i < stats.size(); ++i) {
    auto& st = stats[i];
    st.driver_count = drivers[i].size();
    if (st.trip_count > 0) {
      st.mean_excess_km /= static_cast<double>(st.trip_count);
      st.mean_excess_min /= static_cast<double>(st.trip_count);
    }
  }
  return stats;
}

std::vector<DriverRecord> derive_drivers(const FareSchedule& s, const RoadNetwork& net,
                                         std::span<const TripRecord> trips) {
  s.validate();
  std::map<std::string, DriverRecord> by_id;
  for (const auto& t : trips) {
    auto& d = by_id[t.driver_id];
    if (d.driver_id.empty()) {
      d.driver_id = t.driver_id;
      d.interval_income.assign(s.intervals.size(), 0.0);
    }
    d.trips.push_back(t.trip_id);
    d.interval_income[s.interval_at(minute_of_day(t.start_time))] += trip_fare(s, net, t);
  }
  std::vector<DriverRecord> out;
  out.reserve(by_id.size());
  for (auto& [id, d] : by_id) out.push_back(std::move(d));
  return out;
}

PricingReport pricing_report(const FareSchedule& s, const RoadNetwork& net,
                             std::span<const TripRecord> trips, std::optional<double> u0_override) {
  PricingReport report;
  report.schedule = s;
  const auto stats = interval_stats(s, net, trips);
  std::vector<UtilityRatioPoint> points;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    IntervalRow row;
    row.stats = stats[i];
    if (stats[i].trip_count > 0) {
      row.detour_ratio =
          static_cast<double>(stats[i].detour_count) / static_cast<double>(stats[i].trip_count);
      row.alpha4 = compute_alpha4(stats[i].total_income, stats[i].driver_count, s.duty_minutes);
      report.schedule.intervals[i].alpha4 = row.alpha4;
      row.utility = detour_utility(report.schedule, i);
      points.push_back({*row.utility, row.detour_ratio});
    }
    row.params = report.schedule.intervals[i];
    report.rows.push_back(row);
  }

  if (u0_override) {
    report.u0 = *u0_override;
  } else {
    report.fit = fit_ratio_utility(points);
    if (!report.fit->u0) {
      throw Error(ErrorKind::degenerate_fit, "detour ratio does not vary with utility; pass u0");
    }
    report.u0 = *report.fit->u0;
  }

  for (auto& row : report.rows) {
    if (!row.utility) continue;
    AdjustmentInputs in{s.f0,
                        row.params.alpha1,
                        row.params.alpha2,
                        s.alpha3,
                        *row.alpha4,
                        row.params.v,
                        row.stats.mean_excess_km,
                        row.stats.mean_excess_min,
                        static_cast<double>(row.stats.trip_count),
                        static_cast<double>(row.stats.driver_count),
                        s.duty_minutes};
    row.adjustment = solve_price_adjustment(in, report.u0);
  }
  return report;
}

std::string interval_report_csv(const PricingReport& report) {
  std::string out =
      "interval,start_min,end_min,trips,detours,drivers,detour_ratio,income,mean_excess_km,"
      "mean_excess_min,alpha4,utility,u0,delta_f0,delta_alpha1,delta_alpha4,status\n";
  for (const auto& row : report.rows) {
    const auto& st = row.stats;
    const bool solved = row.adjustment.solvable;
    std::string status = !row.utility ? "empty" : solved ? "solved" : "unsolvable";
    out += std::to_string(st.interval) + "," + fmt("%g", row.params.start_min) + "," +
           fmt("%g", row.params.end_min) + "," + std::to_string(st.trip_count) + "," +
           std::to_string(st.detour_count) + "," + std::to_string(st.driver_count) + "," +
           fmt("%.6f", row.detour_ratio) + "," + money(st.total_income) + "," +
           full(st.mean_excess_km) + "," + full(st.mean_excess_min) + "," +
           opt_full(row.alpha4) + "," + opt_full(row.utility) + "," + full(report.u0) + "," +
           (solved ? full(row.adjustment.delta_f0) : "NA") + "," +
           (solved ? full(row.adjustment.delta_alpha1) : "NA") + "," +
           (solved ? full(row.adjustment.delta_alpha4) : "NA") + "," + status + "\n";
  }
  return out;
}

}  // namespace detour

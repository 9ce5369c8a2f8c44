#pragma once

#include "detour/road_network.hpp"
#include "detour/trip.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace detour {

struct FareInterval {
  double start_min = 0.0;
  double end_min = 0.0;
  double alpha1 = 0.0;  // money per km beyond mu
  double alpha2 = 0.0;  // money per minute beyond tau
  double v = 0.0;       // average serving speed, km/min
  std::optional<double> alpha4;  // opportunity cost, money per minute; computed from data
  friend bool operator==(const FareInterval&, const FareInterval&) = default;
};

/// Piecewise-linear fare: f0 + alpha1 * (D - mu)^+ + alpha2 * (T - tau)^+,
/// with alpha1/alpha2 taken from the interval containing the start time.
struct FareSchedule {
  std::string city;
  double f0 = 0.0;
  double mu = 0.0;      // km included in the base fare
  double tau = 0.0;     // minutes included in the base fare
  double alpha3 = 0.0;  // operating cost per km
  double duty_minutes = 60.0;  // denominator unit of the opportunity cost
  std::vector<FareInterval> intervals;

  void validate() const;
  std::size_t interval_at(double minute_of_day) const;
  friend bool operator==(const FareSchedule&, const FareSchedule&) = default;
};

/// Built-in schedules for "beijing", "shanghai", "guangzhou", "shenzhen".
FareSchedule preset_schedule(const std::string& city);
std::vector<std::string> preset_cities();

std::string schedule_to_json(const FareSchedule& s);
FareSchedule schedule_from_json(const std::string& text);
FareSchedule load_schedule(const std::filesystem::path& path);
void save_schedule(const FareSchedule& s, const std::filesystem::path& path);

/// Fare for a trip of `distance_km` and `duration_min` starting at
/// `start_minute` (minute of day).
double fare(const FareSchedule& s, double distance_km, double duration_min, double start_minute);
double trip_fare(const FareSchedule& s, const RoadNetwork& net, const TripRecord& trip);

/// U = alpha1 v + alpha2 - alpha3 v - alpha4. Throws ErrorKind::sequencing if
/// the interval's alpha4 has not been computed.
double detour_utility(const FareSchedule& s, std::size_t interval);

/// alpha4 = income / (drivers * duty_minutes). Throws ErrorKind::input when
/// there are no drivers.
double compute_alpha4(double income_sum, std::size_t drivers, double duty_minutes = 60.0);

struct RatioUtilityFit {
  double coefficient = 0.0;
  double intercept = 0.0;
  std::optional<double> u0;  // utility at which the fitted ratio is zero
  double r2 = 0.0;
};

/// -intercept / coefficient, or nothing for a flat line.
std::optional<double> utility_intercept(double coefficient, double intercept);

struct UtilityRatioPoint {
  double utility = 0.0;
  double detour_ratio = 0.0;
};

/// OLS of detour ratio on utility. Throws ErrorKind::input for fewer than 3
/// points and ErrorKind::degenerate_fit when utility is constant.
RatioUtilityFit fit_ratio_utility(std::span<const UtilityRatioPoint> points);

struct IntervalStats {
  std::size_t interval = 0;
  std::size_t trip_count = 0;
  std::size_t detour_count = 0;
  std::size_t driver_count = 0;
  double total_income = 0.0;
  double mean_excess_km = 0.0;   // average (D - mu)^+
  double mean_excess_min = 0.0;  // average (T - tau)^+
};

struct AdjustmentInputs {
  double f0 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
  double alpha4 = 0.0;
  double v = 0.0;
  double mean_excess_km = 0.0;
  double mean_excess_min = 0.0;
  double trips = 0.0;    // |A| in the interval
  double drivers = 0.0;  // |B| in the interval
  double duty_minutes = 60.0;
};

struct PriceAdjustment {
  bool solvable = false;
  double delta_f0 = 0.0;
  double delta_alpha1 = 0.0;
  double delta_alpha4 = 0.0;
};

/// Revenue-neutral change of (f0, alpha1) that brings the detour utility to
/// `u0`. Unsolvable (flagged, not thrown) when D-bar, v or the driver count
/// is zero.
PriceAdjustment solve_price_adjustment(const AdjustmentInputs& in, double u0);

/// Average-fare change caused by an adjustment (zero when revenue-neutral).
double revenue_residual(const AdjustmentInputs& in, const PriceAdjustment& adj);
/// Utility after the adjustment minus u0.
double utility_residual(const AdjustmentInputs& in, const PriceAdjustment& adj, double u0);

/// Per-interval trip statistics. Drivers count once per interval in which
/// they start a trip.
std::vector<IntervalStats> interval_stats(const FareSchedule& s, const RoadNetwork& net,
                                          std::span<const TripRecord> trips);

/// Each driver's income per fare interval.
std::vector<DriverRecord> derive_drivers(const FareSchedule& s, const RoadNetwork& net,
                                         std::span<const TripRecord> trips);

struct IntervalRow {
  FareInterval params;
  IntervalStats stats;
  double detour_ratio = 0.0;
  std::optional<double> alpha4;
  std::optional<double> utility;
  PriceAdjustment adjustment;
};

struct PricingReport {
  FareSchedule schedule;  // with alpha4 filled in where computable
  std::vector<IntervalRow> rows;
  std::optional<RatioUtilityFit> fit;
  double u0 = 0.0;
};

/// Computes alpha4 and U per interval, fits U0 across intervals unless
/// `u0_override` is given, and solves the adjustment for every interval.
PricingReport pricing_report(const FareSchedule& s, const RoadNetwork& net,
                             std::span<const TripRecord> trips,
                             std::optional<double> u0_override = std::nullopt);

/// One row per interval. Money columns carry 2 decimals; the adjustment
/// columns are printed at full precision so they back-substitute exactly.
std::string interval_report_csv(const PricingReport& report);

}  // namespace detour

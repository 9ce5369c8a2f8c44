#include "detour/geo.hpp"

#include <algorithm>
#include <numbers>

namespace detour {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

bool valid_coordinate(LatLng p) {
  return std::isfinite(p.lat) && std::isfinite(p.lng) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lng >= -180.0 && p.lng <= 180.0;
}

double haversine_km(LatLng a, LatLng b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lng - a.lng) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double wrap_minute(double minute) {
  double m = std::fmod(minute, kMinutesPerDay);
  if (m < 0.0) m += kMinutesPerDay;
  // fmod of a value just below a multiple of the day can round up to 1440.
  if (m >= kMinutesPerDay) m = 0.0;
  return m;
}

double minute_of_day(double epoch_seconds) {
  return wrap_minute(epoch_seconds / 60.0);
}

LocalFrame::LocalFrame(LatLng origin)
    : origin_(origin), cos_lat_(std::cos(origin.lat * kDegToRad)) {}

LocalFrame::Xy LocalFrame::project(LatLng p) const {
  constexpr double r = kEarthRadiusKm * 1000.0;
  return {r * (p.lng - origin_.lng) * kDegToRad * cos_lat_,
          r * (p.lat - origin_.lat) * kDegToRad};
}

LatLng LocalFrame::unproject(Xy p) const {
  constexpr double r = kEarthRadiusKm * 1000.0;
  return {origin_.lat + p.y / r / kDegToRad,
          origin_.lng + p.x / (r * cos_lat_) / kDegToRad};
}

LatLng offset_meters(LatLng p, double east_m, double north_m) {
  LocalFrame frame(p);
  return frame.unproject({east_m, north_m});
}

}  // namespace detour

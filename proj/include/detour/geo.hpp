#pragma once

#include <cmath>

namespace detour {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kMinutesPerDay = 1440.0;

struct LatLng {
  double lat = 0.0;
  double lng = 0.0;
  friend bool operator==(const LatLng&, const LatLng&) = default;
};

/// One raw GPS fix: position plus generation time in epoch seconds.
struct GpsPoint {
  double lat = 0.0;
  double lng = 0.0;
  double t = 0.0;
  LatLng position() const { return {lat, lng}; }
  friend bool operator==(const GpsPoint&, const GpsPoint&) = default;
};

bool valid_coordinate(LatLng p);

/// Great-circle distance in kilometers (haversine, R = 6371 km). This is the
/// straight-line distance used for destination screening and map matching.
double haversine_km(LatLng a, LatLng b);

/// Minute of the (UTC) day in [0, 1440) for an epoch timestamp in seconds.
double minute_of_day(double epoch_seconds);

/// Reduces an absolute minute count onto [0, 1440).
double wrap_minute(double minute);

/// Equirectangular projection around a fixed origin, in meters. Accurate to
/// well under a meter over a city-sized extent; used for point-to-segment
/// geometry only.
class LocalFrame {
 public:
  LocalFrame() = default;
  explicit LocalFrame(LatLng origin);

  struct Xy {
    double x = 0.0;
    double y = 0.0;
  };

  Xy project(LatLng p) const;
  LatLng unproject(Xy p) const;

 private:
  LatLng origin_{};
  double cos_lat_ = 1.0;
};

/// Moves `p` by (east_m, north_m) meters.
LatLng offset_meters(LatLng p, double east_m, double north_m);

}  // namespace detour

#pragma once

// JSON object codecs shared by the persistence code of several modules.

#include "detour/trip.hpp"

#include "json.hpp"

namespace detour::detail {

using json = nlohmann::ordered_json;

json to_json(const TripRecord& trip);
TripRecord trip_from_json(const json& j);

json to_json(const RoutePlanStep& plan);
RoutePlanStep plan_from_json(const json& j);

json to_json(const LatLng& p);
LatLng latlng_from_json(const json& j);

}  // namespace detour::detail

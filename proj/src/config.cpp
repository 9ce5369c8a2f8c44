#include "detour/config.hpp"

#include "detour/error.hpp"
#include "detour/io.hpp"

#include "json.hpp"

#include <set>

namespace detour {

namespace {

using json = nlohmann::ordered_json;

// Reads optional fields from one JSON object and rejects keys it never asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw Error(ErrorKind::config, name_ + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) {
        throw Error(ErrorKind::config, "unknown config key " + name_ + "." + key);
      }
    }
  }
  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::config, "config key " + name_ + "." + key + " has the wrong type");
    }
  }
  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

void RunConfig::validate() const {
  sim.validate();
  filter.validate();
  routing.validate();
  match.validate();
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::config, "train_fraction must lie in (0, 1)");
  }
  if (!(train.ridge >= 0.0) || !(train.tolerance > 0.0) || train.max_iterations <= 0) {
    throw Error(ErrorKind::config, "invalid training options");
  }
}

RunConfig run_config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("config file: ") + e.what());
  }
  RunConfig c;
  {
    Section top(doc, "config");
    top.get("seed", c.sim.seed);
    top.get("city", c.city);
    top.get("rematch", c.rematch);
    if (const auto* p = top.child("paths")) {
      Section s(*p, "paths");
      s.get("network", c.paths.network);
      s.get("trips", c.paths.trips);
      s.get("model", c.paths.model);
      s.get("schedule", c.paths.schedule);
      s.get("out_dir", c.paths.out_dir);
    }
    if (const auto* p = top.child("sim")) {
      Section s(*p, "sim");
      s.get("rows", c.sim.rows);
      s.get("cols", c.sim.cols);
      s.get("n_trips", c.sim.n_trips);
      s.get("n_drivers", c.sim.n_drivers);
      s.get("detour_inflation", c.sim.detour_inflation);
      s.get("detour_start_max", c.sim.detour_start_max);
      s.get("gps_period_s", c.sim.gps_period_s);
      s.get("gps_noise_m", c.sim.gps_noise_m);
      s.get("destination_jitter_m", c.sim.destination_jitter_m);
      s.get("min_plan_segments", c.sim.min_plan_segments);
      s.get("day_epoch_s", c.sim.day_epoch_s);
      if (const auto* m = s.child("behavior_mix")) {
        Section b(*m, "sim.behavior_mix");
        b.get("normal", c.sim.behavior_mix.normal);
        b.get("detour", c.sim.behavior_mix.detour);
        b.get("avoid_congestion", c.sim.behavior_mix.avoid_congestion);
        b.get("shortcut", c.sim.behavior_mix.shortcut);
      }
    }
    if (const auto* p = top.child("filter")) {
      Section s(*p, "filter");
      s.get("min_travel_time_s", c.filter.min_travel_time_s);
      s.get("max_speed_kmh", c.filter.max_speed_kmh);
      s.get("epsilon_bar", c.filter.epsilon_bar);
    }
    if (const auto* p = top.child("routing")) {
      Section s(*p, "routing");
      s.get("distance", c.routing.distance);
      s.get("time", c.routing.time);
    }
    if (const auto* p = top.child("match")) {
      Section s(*p, "match");
      s.get("emission_sigma_m", c.match.emission_sigma_m);
      s.get("candidate_radius_m", c.match.candidate_radius_m);
      s.get("transition_beta", c.match.transition_beta);
      s.get("max_candidates", c.match.max_candidates);
    }
    if (const auto* p = top.child("train")) {
      Section s(*p, "train");
      s.get("ridge", c.train.ridge);
      s.get("tolerance", c.train.tolerance);
      s.get("max_iterations", c.train.max_iterations);
      s.get("train_fraction", c.train_fraction);
    }
  }
  c.sim.weights = c.routing;
  c.validate();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  const auto& m = c.sim.behavior_mix;
  json doc = {
      {"seed", c.sim.seed},
      {"city", c.city},
      {"rematch", c.rematch},
      {"paths",
       {{"network", c.paths.network},
        {"trips", c.paths.trips},
        {"model", c.paths.model},
        {"schedule", c.paths.schedule},
        {"out_dir", c.paths.out_dir}}},
      {"sim",
       {{"rows", c.sim.rows},
        {"cols", c.sim.cols},
        {"n_trips", c.sim.n_trips},
        {"n_drivers", c.sim.n_drivers},
        {"behavior_mix",
         {{"normal", m.normal},
          {"detour", m.detour},
          {"avoid_congestion", m.avoid_congestion},
          {"shortcut", m.shortcut}}},
        {"detour_inflation", c.sim.detour_inflation},
        {"detour_start_max", c.sim.detour_start_max},
        {"gps_period_s", c.sim.gps_period_s},
        {"gps_noise_m", c.sim.gps_noise_m},
        {"destination_jitter_m", c.sim.destination_jitter_m},
        {"min_plan_segments", c.sim.min_plan_segments},
        {"day_epoch_s", c.sim.day_epoch_s}}},
      {"filter",
       {{"min_travel_time_s", c.filter.min_travel_time_s},
        {"max_speed_kmh", c.filter.max_speed_kmh},
        {"epsilon_bar", c.filter.epsilon_bar}}},
      {"routing", {{"distance", c.routing.distance}, {"time", c.routing.time}}},
      {"match",
       {{"emission_sigma_m", c.match.emission_sigma_m},
        {"candidate_radius_m", c.match.candidate_radius_m},
        {"transition_beta", c.match.transition_beta},
        {"max_candidates", c.match.max_candidates}}},
      {"train",
       {{"ridge", c.train.ridge},
        {"tolerance", c.train.tolerance},
        {"max_iterations", c.train.max_iterations},
        {"train_fraction", c.train_fraction}}}};
  return doc.dump(1) + "\n";
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_text_file(path));
}

}  // namespace detour

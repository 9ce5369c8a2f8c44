#pragma once

#include "detour/map_matching.hpp"
#include "detour/offline_classifier.hpp"
#include "detour/routing.hpp"
#include "detour/simulator.hpp"
#include "detour/trip.hpp"

#include <filesystem>
#include <string>

namespace detour {

struct RunPaths {
  std::string network = "network.json";
  std::string trips = "trips.jsonl";
  std::string model = "model.json";
  std::string schedule;  // empty: use the preset named by RunConfig::city
  std::string out_dir = "out";
  friend bool operator==(const RunPaths&, const RunPaths&) = default;
};

/// Everything a CLI run depends on. Relative paths resolve against out_dir.
struct RunConfig {
  RunPaths paths;
  SimConfig sim;
  FilterRules filter;
  RoutingWeights routing;
  MatchConfig match;
  TrainOptions train;
  double train_fraction = 0.5;
  bool rematch = false;  // rebuild trajectories from GPS in gen-trips
  std::string city = "beijing";
  void validate() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Missing keys keep their defaults; unknown keys are a config error.
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace detour

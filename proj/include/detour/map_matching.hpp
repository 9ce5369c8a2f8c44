#pragma once

#include "detour/geo.hpp"
#include "detour/road_network.hpp"
#include "detour/routing.hpp"

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace detour {

struct AtrStep {
  SegmentId segment;
  double t = 0.0;  // epoch seconds at which the segment is entered
  friend bool operator==(const AtrStep&, const AtrStep&) = default;
};

/// Map-matched trip: ordered (segment, timestamp) pairs, timestamps strictly
/// increasing, consecutive segments connected head-to-tail.
struct AbstractTrajectory {
  std::string trip_id;
  std::vector<AtrStep> steps;
  friend bool operator==(const AbstractTrajectory&, const AbstractTrajectory&) = default;
};

/// Throws ErrorKind::structural when `atr` breaks its invariants.
void validate_trajectory(const RoadNetwork& net, const AbstractTrajectory& atr);

struct MatchConfig {
  double emission_sigma_m = 25.0;
  double candidate_radius_m = 100.0;
  double transition_beta = 2.0;  // meters of |route - great circle| per e-fold
  std::size_t max_candidates = 8;
  void validate() const;
  friend bool operator==(const MatchConfig&, const MatchConfig&) = default;
};

/// A possible position of one GPS fix on a segment.
struct Candidate {
  RoadNetwork::Index segment = 0;
  double offset_m = 0.0;    // along the segment from its tail
  double distance_m = 0.0;  // perpendicular distance from the fix
};

/// Emission and transition log-probabilities for one observation sequence.
/// `transition[k][i][j]` scores moving from candidate i of point k-1 to
/// candidate j of point k (entry 0 is unused).
struct MatchLattice {
  std::vector<std::vector<Candidate>> candidates;
  std::vector<std::vector<double>> emission;
  std::vector<std::vector<std::vector<double>>> transition;
};

/// Hidden-Markov map matcher. Holds a spatial index and a cache of
/// shortest-distance trees, so one instance should not be shared between
/// threads.
class MapMatcher {
 public:
  MapMatcher(const RoadNetwork& net, MatchConfig cfg);

  /// Candidates within the radius, nearest `max_candidates` kept, returned in
  /// segment-id order.
  std::vector<Candidate> candidates(const GpsPoint& p) const;

  double emission_log_prob(const Candidate& c) const;

  /// Driving distance in meters between two on-segment positions.
  double route_distance_m(const Candidate& from, const Candidate& to);

  double transition_log_prob(const GpsPoint& a, const Candidate& ca, const GpsPoint& b,
                             const Candidate& cb);

  MatchLattice build_lattice(std::span<const GpsPoint> points);

  /// Viterbi decode; returns one candidate index per point. Ties go to the
  /// lower candidate index (candidates are in segment-id order).
  static std::vector<std::size_t> decode(const MatchLattice& lattice);

  AbstractTrajectory match(std::span<const GpsPoint> points, std::string trip_id = {});

  const MatchConfig& config() const { return cfg_; }

 private:
  const DistanceTree& tree_from(RoadNetwork::Index node);
  AbstractTrajectory assemble(std::span<const GpsPoint> points, const MatchLattice& lattice,
                              const std::vector<std::size_t>& states, std::string trip_id);

  const RoadNetwork& net_;
  MatchConfig cfg_;
  LocalFrame frame_;
  std::vector<LocalFrame::Xy> node_xy_;
  double cell_m_ = 250.0;
  double min_x_ = 0.0;
  double min_y_ = 0.0;
  std::size_t grid_w_ = 1;
  std::size_t grid_h_ = 1;
  std::vector<std::vector<RoadNetwork::Index>> cells_;
  std::unordered_map<RoadNetwork::Index, DistanceTree> trees_;
};

AbstractTrajectory match_trajectory(const RoadNetwork& net, std::span<const GpsPoint> points,
                                    const MatchConfig& cfg, std::string trip_id = {});

}  // namespace detour

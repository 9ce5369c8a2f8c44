#pragma once

#include "detour/road_network.hpp"

#include <span>
#include <vector>

namespace detour {

/// Scalarization of the route objective: w_distance per km plus w_time per
/// minute. Units are whatever the caller wants them to mean.
struct RoutingWeights {
  double distance = 0.5;
  double time = 0.5;
  void validate() const;
  friend bool operator==(const RoutingWeights&, const RoutingWeights&) = default;
};

/// One recommendation r(s_i, s_n, t_i).
///
/// The path starts with the origin segment and stops on entering the
/// destination segment, so the destination itself is not part of it and a
/// plan from a segment to itself is empty. `distance_km` and `est_time_min`
/// cover exactly the listed segments, with entry times accumulated forward
/// from `planned_at`.
struct RoutePlanStep {
  std::vector<SegmentId> path;
  double planned_at = 0.0;  // epoch seconds
  double distance_km = 0.0;
  double est_time_min = 0.0;
  friend bool operator==(const RoutePlanStep&, const RoutePlanStep&) = default;
};

/// Dis(path). Throws ErrorKind::structural if the path is not contiguous.
double path_distance(const RoadNetwork& net, std::span<const SegmentId> path);

/// Et(path, depart): minutes, entry time of segment k+1 = entry of k plus the
/// travel time of k.
double path_est_time(const RoadNetwork& net, std::span<const SegmentId> path,
                     double depart_epoch_s);

double plan_cost(const RoutePlanStep& plan, const RoutingWeights& w);

/// Minimizes w.distance * Dis + w.time * Et over node-simple paths from the
/// origin segment to the destination segment. Ties (exactly equal cost) go
/// to the lexicographically smaller segment-id sequence.
///
/// Throws ErrorKind::no_route when the destination cannot be reached.
RoutePlanStep route_plan(const RoadNetwork& net, SegmentId origin, SegmentId dest,
                         double depart_epoch_s, const RoutingWeights& w);

/// Static shortest-distance tree from one node (time is irrelevant when only
/// distance is weighted). `pred` holds the segment index used to reach each
/// node, or -1.
struct DistanceTree {
  std::vector<double> dist_km;
  std::vector<std::int64_t> pred;
};

DistanceTree distance_tree(const RoadNetwork& net, RoadNetwork::Index source_node);

/// Segment indices along the tree from its source to `target_node`; empty when
/// target is the source. Throws ErrorKind::no_route if unreachable.
std::vector<RoadNetwork::Index> tree_path(const RoadNetwork& net, const DistanceTree& tree,
                                          RoadNetwork::Index target_node);

}  // namespace detour

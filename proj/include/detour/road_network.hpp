#pragma once

#include "detour/geo.hpp"
#include "detour/ids.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace detour {

struct SpeedBucket {
  double start_min = 0.0;  // minute of day the bucket begins
  double speed_kmh = 0.0;
  friend bool operator==(const SpeedBucket&, const SpeedBucket&) = default;
};

/// Piecewise-constant speed over the day. Buckets are sorted, the first one
/// starts at minute 0 and each runs until the next one starts (the last until
/// 1440).
class SpeedProfile {
 public:
  SpeedProfile() = default;
  explicit SpeedProfile(std::vector<SpeedBucket> buckets);

  static SpeedProfile flat(double speed_kmh);

  /// Speed in the bucket containing `minute` (any absolute minute; wrapped
  /// onto the day).
  double speed_at(double minute) const;

  /// Largest speed over any bucket intersecting [from, to] (absolute minutes).
  double max_speed_in(double from, double to) const;
  double max_speed() const;

  /// Minutes of day where the speed goes up relative to the preceding bucket,
  /// including the midnight wrap.
  std::vector<double> speedup_minutes() const;

  std::span<const SpeedBucket> buckets() const { return buckets_; }

  friend bool operator==(const SpeedProfile&, const SpeedProfile&) = default;

 private:
  std::vector<SpeedBucket> buckets_;
};

struct Node {
  NodeId id;
  LatLng pos;
  friend bool operator==(const Node&, const Node&) = default;
};

struct Segment {
  SegmentId id;
  NodeId from;
  NodeId to;
  double length_km = 0.0;
  SpeedProfile profile;
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Minutes needed to traverse `seg` when entering it at `entry_minute`. The
/// speed is sampled once at entry and held for the whole segment.
double segment_travel_time(const Segment& seg, double entry_minute);

/// Immutable directed road graph. Nodes and segments are kept sorted by id;
/// internal algorithms address them by dense index.
class RoadNetwork {
 public:
  using Index = std::uint32_t;

  RoadNetwork() = default;
  RoadNetwork(std::vector<Node> nodes, std::vector<Segment> segments);

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Segment> segments() const { return segments_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t segment_count() const { return segments_.size(); }

  bool has_segment(SegmentId id) const;
  bool has_node(NodeId id) const;
  Index segment_index(SegmentId id) const;
  Index node_index(NodeId id) const;
  const Segment& segment(SegmentId id) const;
  const Segment& segment_at(Index i) const { return segments_[i]; }
  const Node& node(NodeId id) const;
  const Node& node_at(Index i) const { return nodes_[i]; }

  /// Tail / head node index of a segment index.
  Index tail(Index seg) const { return seg_tail_[seg]; }
  Index head(Index seg) const { return seg_head_[seg]; }

  /// Outgoing (incoming) segment indices of a node, sorted by segment id.
  std::span<const Index> outgoing(Index node) const;
  std::span<const Index> incoming(Index node) const;

  /// True when some segment speeds up at a minute inside (from, to].
  bool has_speedup_in(double from, double to) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Segment> segments_;
  std::unordered_map<NodeId, Index> node_lookup_;
  std::unordered_map<SegmentId, Index> segment_lookup_;
  std::vector<Index> seg_tail_;
  std::vector<Index> seg_head_;
  std::vector<std::size_t> out_offsets_;
  std::vector<Index> out_segments_;
  std::vector<std::size_t> in_offsets_;
  std::vector<Index> in_segments_;
  std::vector<double> speedup_minutes_;
};

/// Canonical JSON text for a network (nodes then segments, each sorted by id).
std::string network_to_json(const RoadNetwork& net);
RoadNetwork network_from_json(const std::string& text);

RoadNetwork load_network(const std::filesystem::path& path);
void save_network(const RoadNetwork& net, const std::filesystem::path& path);

}  // namespace detour

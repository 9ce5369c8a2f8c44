#include "detour/road_network.hpp"

#include "detour/error.hpp"
#include "detour/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace detour {

using json = nlohmann::ordered_json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::missing_input, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::missing_input, "cannot write " + path.string());
  }
  out << text;
}

SpeedProfile::SpeedProfile(std::vector<SpeedBucket> buckets)
    : buckets_(std::move(buckets)) {
  if (buckets_.empty()) {
    throw Error(ErrorKind::config, "speed profile has no buckets");
  }
  if (buckets_.front().start_min != 0.0) {
    throw Error(ErrorKind::config, "speed profile does not start at minute 0");
  }
  for (std::size_t i = 0; i < buckets_.size(); ++i) {
    const auto& b = buckets_[i];
    if (!std::isfinite(b.speed_kmh) || b.speed_kmh <= 0.0) {
      throw Error(ErrorKind::config, "speed profile has a non-positive speed");
    }
    if (!(b.start_min >= 0.0 && b.start_min < kMinutesPerDay)) {
      throw Error(ErrorKind::config, "speed bucket starts outside [0, 1440)");
    }
    if (i > 0 && !(b.start_min > buckets_[i - 1].start_min)) {
      throw Error(ErrorKind::config,
                  "speed buckets overlap or are not sorted by start minute");
    }
  }
}

SpeedProfile SpeedProfile::flat(double speed_kmh) {
  return SpeedProfile({{0.0, speed_kmh}});
}

double SpeedProfile::speed_at(double minute) const {
  const double m = wrap_minute(minute);
  auto it = std::upper_bound(
      buckets_.begin(), buckets_.end(), m,
      [](double v, const SpeedBucket& b) { return v < b.start_min; });
  return std::prev(it)->speed_kmh;
}

double SpeedProfile::max_speed() const {
  double best = 0.0;
  for (const auto& b : buckets_) best = std::max(best, b.speed_kmh);
  return best;
}

double SpeedProfile::max_speed_in(double from, double to) const {
  if (to - from >= kMinutesPerDay || buckets_.size() == 1) return max_speed();
  const double a = wrap_minute(from);
  const double b = a + (to - from);
  // Walk buckets over at most two days so a window crossing midnight is seen.
  double best = 0.0;
  for (int day = 0; day < 2; ++day) {
    for (std::size_t i = 0; i < buckets_.size(); ++i) {
      const double lo = buckets_[i].start_min + day * kMinutesPerDay;
      const double hi = (i + 1 < buckets_.size()
                             ? buckets_[i + 1].start_min
                             : kMinutesPerDay) +
                        day * kMinutesPerDay;
      if (hi > a && lo <= b) best = std::max(best, buckets_[i].speed_kmh);
    }
  }
  return best;
}

std::vector<double> SpeedProfile::speedup_minutes() const {
  std::vector<double> out;
  if (buckets_.size() < 2) return out;
  if (buckets_.front().speed_kmh > buckets_.back().speed_kmh) out.push_back(0.0);
  for (std::size_t i = 1; i < buckets_.size(); ++i) {
    if (buckets_[i].speed_kmh > buckets_[i - 1].speed_kmh) {
      out.push_back(buckets_[i].start_min);
    }
  }
  return out;
}

double segment_travel_time(const Segment& seg, double entry_minute) {
  return seg.length_km / seg.profile.speed_at(entry_minute) * 60.0;
}

RoadNetwork::RoadNetwork(std::vector<Node> nodes, std::vector<Segment> segments)
    : nodes_(std::move(nodes)), segments_(std::move(segments)) {
  std::sort(nodes_.begin(), nodes_.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(segments_.begin(), segments_.end(),
            [](const Segment& a, const Segment& b) { return a.id < b.id; });

  node_lookup_.reserve(nodes_.size());
  for (Index i = 0; i < nodes_.size(); ++i) {
    if (!valid_coordinate(nodes_[i].pos)) {
      throw Error(ErrorKind::config, "node " + std::to_string(nodes_[i].id.value) +
                                         " has invalid coordinates");
    }
    if (!node_lookup_.emplace(nodes_[i].id, i).second) {
      throw Error(ErrorKind::config,
                  "duplicate node id " + std::to_string(nodes_[i].id.value));
    }
  }

  segment_lookup_.reserve(segments_.size());
  seg_tail_.resize(segments_.size());
  seg_head_.resize(segments_.size());
  for (Index i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    const std::string name = "segment " + std::to_string(s.id.value);
    if (!segment_lookup_.emplace(s.id, i).second) {
      throw Error(ErrorKind::config, "duplicate " + name);
    }
    if (!std::isfinite(s.length_km) || s.length_km <= 0.0) {
      throw Error(ErrorKind::config, name + " has non-positive length");
    }
    if (s.profile.buckets().empty()) {
      throw Error(ErrorKind::config, name + " has no speed profile");
    }
    auto from = node_lookup_.find(s.from);
    auto to = node_lookup_.find(s.to);
    if (from == node_lookup_.end() || to == node_lookup_.end()) {
      throw Error(ErrorKind::config, name + " references an unknown node");
    }
    seg_tail_[i] = from->second;
    seg_head_[i] = to->second;
  }

  // CSR adjacency; segments are already sorted by id so each list is too.
  auto build = [&](const std::vector<Index>& key, std::vector<std::size_t>& offsets,
                   std::vector<Index>& items) {
    offsets.assign(nodes_.size() + 1, 0);
    for (Index s = 0; s < segments_.size(); ++s) ++offsets[key[s] + 1];
    for (std::size_t n = 0; n < nodes_.size(); ++n) offsets[n + 1] += offsets[n];
    items.resize(segments_.size());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (Index s = 0; s < segments_.size(); ++s) items[cursor[key[s]]++] = s;
  };
  build(seg_tail_, out_offsets_, out_segments_);
  build(seg_head_, in_offsets_, in_segments_);

  for (const auto& s : segments_) {
    for (double m : s.profile.speedup_minutes()) speedup_minutes_.push_back(m);
  }
  std::sort(speedup_minutes_.begin(), speedup_minutes_.end());
  speedup_minutes_.erase(std::unique(speedup_minutes_.begin(), speedup_minutes_.end()),
                         speedup_minutes_.end());
}

bool RoadNetwork::has_segment(SegmentId id) const {
  return segment_lookup_.contains(id);
}

bool RoadNetwork::has_node(NodeId id) const { return node_lookup_.contains(id); }

RoadNetwork::Index RoadNetwork::segment_index(SegmentId id) const {
  auto it = segment_lookup_.find(id);
  if (it == segment_lookup_.end()) {
    throw Error(ErrorKind::input, "unknown segment " + std::to_string(id.value));
  }
  return it->second;
}

RoadNetwork::Index RoadNetwork::node_index(NodeId id) const {
  auto it = node_lookup_.find(id);
  if (it == node_lookup_.end()) {
    throw Error(ErrorKind::input, "unknown node " + std::to_string(id.value));
  }
  return it->second;
}

const Segment& RoadNetwork::segment(SegmentId id) const {
  return segments_[segment_index(id)];
}

const Node& RoadNetwork::node(NodeId id) const { return nodes_[node_index(id)]; }

std::span<const RoadNetwork::Index> RoadNetwork::outgoing(Index node) const {
  return {out_segments_.data() + out_offsets_[node],
          out_offsets_[node + 1] - out_offsets_[node]};
}

std::span<const RoadNetwork::Index> RoadNetwork::incoming(Index node) const {
  return {in_segments_.data() + in_offsets_[node],
          in_offsets_[node + 1] - in_offsets_[node]};
}

bool RoadNetwork::has_speedup_in(double from, double to) const {
  if (speedup_minutes_.empty() || !(to > from)) return false;
  if (to - from >= kMinutesPerDay) return true;
  const double a = wrap_minute(from);
  const double b = a + (to - from);
  for (double m : speedup_minutes_) {
    // A breakpoint recurs every day; check today's and tomorrow's instance.
    if ((m > a && m <= b) || (m + kMinutesPerDay > a && m + kMinutesPerDay <= b)) {
      return true;
    }
  }
  return false;
}

std::string network_to_json(const RoadNetwork& net) {
  json doc;
  json nodes = json::array();
  for (const auto& n : net.nodes()) {
    nodes.push_back({{"id", n.id.value}, {"lat", n.pos.lat}, {"lng", n.pos.lng}});
  }
  json segments = json::array();
  for (const auto& s : net.segments()) {
    json profile = json::array();
    for (const auto& b : s.profile.buckets()) {
      profile.push_back({{"start_min", b.start_min}, {"speed_kmh", b.speed_kmh}});
    }
    segments.push_back({{"id", s.id.value},
                        {"from", s.from.value},
                        {"to", s.to.value},
                        {"length_km", s.length_km},
                        {"speed_profile", std::move(profile)}});
  }
  doc["nodes"] = std::move(nodes);
  doc["segments"] = std::move(segments);
  return doc.dump(1) + "\n";
}

RoadNetwork network_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("network file: ") + e.what());
  }
  try {
    std::vector<Node> nodes;
    for (const auto& n : doc.at("nodes")) {
      nodes.push_back({NodeId{n.at("id").get<std::int64_t>()},
                       {n.at("lat").get<double>(), n.at("lng").get<double>()}});
    }
    std::vector<Segment> segments;
    for (const auto& s : doc.at("segments")) {
      std::vector<SpeedBucket> buckets;
      for (const auto& b : s.at("speed_profile")) {
        buckets.push_back({b.at("start_min").get<double>(), b.at("speed_kmh").get<double>()});
      }
      segments.push_back({SegmentId{s.at("id").get<std::int64_t>()},
                          NodeId{s.at("from").get<std::int64_t>()},
                          NodeId{s.at("to").get<std::int64_t>()},
                          s.at("length_km").get<double>(),
                          SpeedProfile(std::move(buckets))});
    }
    return RoadNetwork(std::move(nodes), std::move(segments));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("network file: ") + e.what());
  }
}

RoadNetwork load_network(const std::filesystem::path& path) {
  return network_from_json(read_text_file(path));
}

void save_network(const RoadNetwork& net, const std::filesystem::path& path) {
  write_text_file(path, network_to_json(net));
}

}  // namespace detour

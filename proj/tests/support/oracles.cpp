#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

using detour::NodeId;
using detour::Segment;
using detour::SpeedBucket;
using detour::SpeedProfile;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double haversine_km(double lat1, double lng1, double lat2, double lng2) {
  const double rad = std::numbers::pi / 180.0;
  const double a = std::pow(std::sin((lat2 - lat1) * rad / 2), 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) *
                       std::pow(std::sin((lng2 - lng1) * rad / 2), 2);
  return 6371.0 * 2.0 * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

double bucket_speed(const Segment& seg, double minute) {
  double m = std::fmod(minute, 1440.0);
  if (m < 0) m += 1440.0;
  double speed = 0.0;
  for (const auto& b : seg.profile.buckets()) {
    if (b.start_min <= m) speed = b.speed_kmh;
  }
  return speed;
}

namespace {

struct Search {
  const RoadNetwork& net;
  const detour::RoutingWeights& w;
  RoadNetwork::Index goal_node;
  std::vector<bool> used;
  std::vector<SegmentId> path;
  std::optional<BrutePlan> best;

  void visit(RoadNetwork::Index node, double d, double est, double entry) {
    if (node == goal_node) {
      const double cost = w.distance * d + w.time * est;
      if (!best || cost < best->cost || (cost == best->cost && path < best->path)) {
        best = BrutePlan{path, cost};
      }
      return;
    }
    for (RoadNetwork::Index e : net.outgoing(node)) {
      const auto next = net.head(e);
      if (used[next]) continue;
      const Segment& seg = net.segment_at(e);
      const double tt = seg.length_km / bucket_speed(seg, entry) * 60.0;
      used[next] = true;
      path.push_back(seg.id);
      visit(next, d + seg.length_km, est + tt, entry + tt);
      path.pop_back();
      used[next] = false;
    }
  }
};

}  // namespace

std::optional<BrutePlan> brute_force_route(const RoadNetwork& net, SegmentId origin,
                                           SegmentId dest, double depart_epoch_s,
                                           const detour::RoutingWeights& w) {
  if (origin == dest) return BrutePlan{{}, 0.0};
  const auto o = net.segment_index(origin);
  const auto g = net.segment_index(dest);
  Search s{net, w, net.tail(g), std::vector<bool>(net.node_count(), false), {}, std::nullopt};
  double entry = std::fmod(depart_epoch_s / 60.0, 1440.0);
  if (entry < 0) entry += 1440.0;
  const Segment& first = net.segment_at(o);
  const double tt = first.length_km / bucket_speed(first, entry) * 60.0;
  s.used[net.head(o)] = true;
  s.path.push_back(origin);
  s.visit(net.head(o), 0.0 + first.length_km, 0.0 + tt, entry + tt);
  return s.best;
}

RoadNetwork random_network(std::mt19937_64& rng, int nodes, double density) {
  const bool quantized = uniform(rng) < 0.5;
  std::vector<detour::Node> ns;
  for (int i = 1; i <= nodes; ++i) {
    ns.push_back({NodeId{i}, {39.9 + uniform(rng, 0, 0.02), 116.4 + uniform(rng, 0, 0.02)}});
  }
  const double speeds[] = {15.0, 20.0, 30.0, 40.0, 60.0};
  std::vector<Segment> segs;
  std::int64_t next_id = 1;
  for (int a = 1; a <= nodes; ++a) {
    for (int b = 1; b <= nodes; ++b) {
      if (a == b || uniform(rng) >= density) continue;
      const int copies = uniform(rng) < 0.05 ? 2 : 1;
      for (int c = 0; c < copies; ++c) {
        Segment s;
        s.id = SegmentId{next_id++};
        s.from = NodeId{a};
        s.to = NodeId{b};
        s.length_km = quantized ? 0.25 * (1 + static_cast<int>(uniform(rng, 0, 8)))
                                : uniform(rng, 0.2, 3.0);
        std::vector<SpeedBucket> buckets{{0.0, 0.0}};
        const int extra = static_cast<int>(uniform(rng, 0, 3));
        for (int k = 0; k < extra; ++k) {
          buckets.push_back({std::floor(uniform(rng, 1, 1439)), 0.0});
        }
        std::sort(buckets.begin(), buckets.end(),
                  [](const SpeedBucket& x, const SpeedBucket& y) { return x.start_min < y.start_min; });
        buckets.erase(std::unique(buckets.begin(), buckets.end(),
                                  [](const SpeedBucket& x, const SpeedBucket& y) {
                                    return x.start_min == y.start_min;
                                  }),
                      buckets.end());
        for (auto& bk : buckets) {
          bk.speed_kmh = quantized ? speeds[static_cast<int>(uniform(rng, 0, 5))]
                                   : uniform(rng, 10.0, 70.0);
        }
        s.profile = SpeedProfile(std::move(buckets));
        segs.push_back(std::move(s));
      }
    }
  }
  return RoadNetwork(std::move(ns), std::move(segs));
}

std::optional<ViterbiResult> enumerate_lattice(const detour::MatchLattice& lattice) {
  const std::size_t n = lattice.candidates.size();
  if (n == 0) return ViterbiResult{};
  std::vector<std::size_t> seq(n, 0);
  std::optional<ViterbiResult> best;
  const auto reverse_less = [](const std::vector<std::size_t>& a,
                               const std::vector<std::size_t>& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
  };
  while (true) {
    double s = lattice.emission[0][seq[0]];
    for (std::size_t k = 1; k < n; ++k) {
      s = s + lattice.transition[k][seq[k - 1]][seq[k]];
      s = s + lattice.emission[k][seq[k]];
    }
    if (s > -std::numeric_limits<double>::infinity()) {
      if (!best || s > best->score || (s == best->score && reverse_less(seq, best->states))) {
        best = ViterbiResult{seq, s};
      }
    }
    std::size_t k = 0;
    while (k < n && ++seq[k] == lattice.candidates[k].size()) seq[k++] = 0;
    if (k == n) break;
  }
  return best;
}

double mann_whitney_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

RoadNetwork make_network(const std::vector<std::pair<double, double>>& positions,
                         const std::vector<std::tuple<int, int, double, double>>& segments) {
  std::vector<detour::Node> ns;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    ns.push_back({NodeId{static_cast<std::int64_t>(i + 1)},
                  {positions[i].first, positions[i].second}});
  }
  std::vector<Segment> segs;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& [a, b, len, speed] = segments[i];
    Segment s;
    s.id = SegmentId{static_cast<std::int64_t>(i + 1)};
    s.from = NodeId{a};
    s.to = NodeId{b};
    s.length_km = len;
    s.profile = SpeedProfile::flat(speed);
    segs.push_back(std::move(s));
  }
  return RoadNetwork(std::move(ns), std::move(segs));
}

}  // namespace oracle

#include "detour/routing.hpp"

#include "detour/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace detour {

namespace {

using Index = RoadNetwork::Index;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int32_t kNoParent = -1;

struct HeapItem {
  double key;
  std::uint32_t id;
};

struct MinFirst {
  bool operator()(const HeapItem& a, const HeapItem& b) const {
    if (a.key != b.key) return a.key > b.key;
    return a.id > b.id;
  }
};

using MinHeap = std::priority_queue<HeapItem, std::vector<HeapItem>, MinFirst>;

// Plain Dijkstra over a static per-segment weight. `reverse` walks incoming
// segments, producing distances *to* the source.
template <typename WeightFn>
void static_dijkstra(const RoadNetwork& net, Index source, bool reverse, WeightFn weight,
                     std::vector<double>& dist, std::vector<std::int64_t>& pred) {
  dist.assign(net.node_count(), kInf);
  pred.assign(net.node_count(), -1);
  dist[source] = 0.0;
  MinHeap heap;
  heap.push({0.0, source});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    auto edges = reverse ? net.incoming(u) : net.outgoing(u);
    for (Index s : edges) {
      const Index v = reverse ? net.tail(s) : net.head(s);
      const double nd = d + weight(s);
      if (nd < dist[v]) {
        dist[v] = nd;
        pred[v] = s;
        heap.push({nd, v});
      }
    }
  }
}

std::vector<Index> walk_back(const RoadNetwork& net, const std::vector<std::int64_t>& pred,
                             Index source, Index target) {
  std::vector<Index> out;
  Index cur = target;
  while (cur != source) {
    if (pred[cur] < 0) {
      throw Error(ErrorKind::no_route, "node not reachable in distance tree");
    }
    const auto s = static_cast<Index>(pred[cur]);
    out.push_back(s);
    cur = net.tail(s);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

struct Label {
  Index node;
  Index seg;  // segment whose traversal produced this label
  std::int32_t parent;
  double dist;
  double est;
  double entry;  // absolute minute at `node`
  double cost;
  bool dead = false;
};

enum class Dominance { none, distance, time, both };

class LabelSearch {
 public:
  LabelSearch(const RoadNetwork& net, const RoutingWeights& w) : net_(net), w_(w) {}

  std::vector<SegmentId> path_of(std::int32_t id) const {
    std::vector<SegmentId> out;
    for (std::int32_t cur = id; cur != kNoParent; cur = labels_[cur].parent) {
      out.push_back(net_.segment_at(labels_[cur].seg).id);
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  RoutePlanStep run(Index origin, Index dest, double depart_epoch_s) {
    const double m0 = minute_of_day(depart_epoch_s);
    const Index start = net_.head(origin);
    const Index goal = net_.tail(dest);

    // Root: we always traverse the origin segment first.
    const double tt0 = segment_travel_time(net_.segment_at(origin), m0);
    Label root{start, origin, kNoParent, 0.0 + net_.segment_at(origin).length_km,
               0.0 + tt0, m0 + tt0, 0.0};
    root.cost = w_.distance * root.dist + w_.time * root.est;
    labels_.push_back(root);
    if (start == goal) return finish(0, depart_epoch_s);

    // Incumbent: static shortest path under the speeds at departure. It is a
    // node-simple path, so it bounds the search from above.
    std::vector<double> dist;
    std::vector<std::int64_t> pred;
    static_dijkstra(
        net_, start, false,
        [&](Index s) {
          const auto& seg = net_.segment_at(s);
          return w_.distance * seg.length_km + w_.time * segment_travel_time(seg, m0);
        },
        dist, pred);
    if (!std::isfinite(dist[goal])) {
      throw Error(ErrorKind::no_route,
                  "segment " + std::to_string(net_.segment_at(dest).id.value) +
                      " is unreachable from segment " +
                      std::to_string(net_.segment_at(origin).id.value));
    }
    std::vector<SegmentId> incumbent{net_.segment_at(origin).id};
    for (Index s : walk_back(net_, pred, start, goal)) {
      incumbent.push_back(net_.segment_at(s).id);
    }
    best_path_ = incumbent;
    best_cost_ = w_.distance * path_distance(net_, incumbent) +
                 w_.time * path_est_time(net_, incumbent, depart_epoch_s);

    // Every label worth keeping has elapsed time <= best_cost / w_time, which
    // bounds the window of entry times the search can see.
    const double horizon = w_.time > 0.0 ? m0 + best_cost_ / w_.time : kInf;
    if (w_.time == 0.0) {
      dominance_ = Dominance::distance;
    } else if (net_.has_speedup_in(m0, horizon)) {
      // Travel times can drop at a speed-up breakpoint, so arriving later may
      // pay off; no label can be discarded in favour of another.
      dominance_ = Dominance::none;
    } else {
      dominance_ = w_.distance == 0.0 ? Dominance::time : Dominance::both;
    }

    // Admissible cost-to-go using the fastest speed seen in the window.
    std::vector<double> to_goal;
    std::vector<std::int64_t> unused;
    static_dijkstra(
        net_, goal, true,
        [&](Index s) {
          const auto& seg = net_.segment_at(s);
          double c = w_.distance * seg.length_km;
          if (w_.time > 0.0) {
            c += w_.time * seg.length_km / seg.profile.max_speed_in(m0, horizon) * 60.0;
          }
          return c;
        },
        to_goal, unused);
    heuristic_ = std::move(to_goal);
    for (double& h : heuristic_) h *= (1.0 - 1e-9);

    node_labels_.assign(net_.node_count(), {});
    node_labels_[start].push_back(0);
    MinHeap heap;
    heap.push({root.cost + heuristic_[start], 0});
    while (!heap.empty()) {
      auto [f, id] = heap.top();
      heap.pop();
      if (f > best_cost_) break;
      if (labels_[id].dead) continue;
      expand(id, goal, heap);
    }

    RoutePlanStep plan;
    plan.path = best_path_;
    plan.planned_at = depart_epoch_s;
    plan.distance_km = path_distance(net_, plan.path);
    plan.est_time_min = path_est_time(net_, plan.path, depart_epoch_s);
    return plan;
  }

 private:
  RoutePlanStep finish(std::int32_t id, double depart_epoch_s) {
    RoutePlanStep plan;
    plan.path = path_of(id);
    plan.planned_at = depart_epoch_s;
    plan.distance_km = path_distance(net_, plan.path);
    plan.est_time_min = path_est_time(net_, plan.path, depart_epoch_s);
    return plan;
  }

  bool on_path(std::int32_t id, Index node) const {
    for (std::int32_t cur = id; cur != kNoParent; cur = labels_[cur].parent) {
      if (labels_[cur].node == node) return true;
    }
    return false;
  }

  // True when `a` makes `b` useless: no completion of b beats the same
  // completion of a. Only sound when the window has no speed-up breakpoint.
  bool dominates(const Label& a, std::int32_t a_id, const Label& b, std::int32_t b_id) const {
    bool le = false;
    bool eq = false;
    switch (dominance_) {
      case Dominance::none:
        return false;
      case Dominance::distance:
        le = a.dist <= b.dist;
        eq = a.dist == b.dist;
        break;
      case Dominance::time:
        le = a.est <= b.est && a.entry <= b.entry;
        eq = a.est == b.est && a.entry == b.entry;
        break;
      case Dominance::both:
        le = a.dist <= b.dist && a.est <= b.est && a.entry <= b.entry;
        eq = a.dist == b.dist && a.est == b.est && a.entry == b.entry;
        break;
    }
    if (!le) return false;
    if (!eq) return true;
    return path_of(a_id) <= path_of(b_id);
  }

  void expand(std::int32_t id, Index goal, MinHeap& heap) {
    const Label cur = labels_[id];
    for (Index s : net_.outgoing(cur.node)) {
      const Index v = net_.head(s);
      if (on_path(id, v)) continue;
      const auto& seg = net_.segment_at(s);
      const double tt = segment_travel_time(seg, cur.entry);
      Label next{v, s, id, cur.dist + seg.length_km, cur.est + tt, cur.entry + tt, 0.0};
      next.cost = w_.distance * next.dist + w_.time * next.est;

      if (v == goal) {
        if (next.cost > best_cost_) continue;
        labels_.push_back(next);
        const auto nid = static_cast<std::int32_t>(labels_.size() - 1);
        auto candidate = path_of(nid);
        if (next.cost < best_cost_ || candidate < best_path_) {
          best_cost_ = next.cost;
          best_path_ = std::move(candidate);
        }
        continue;
      }

      if (!std::isfinite(heuristic_[v])) continue;
      const double f = next.cost + heuristic_[v];
      if (f > best_cost_) continue;

      const auto nid = static_cast<std::int32_t>(labels_.size());
      labels_.push_back(next);
      if (dominance_ != Dominance::none) {
        bool dominated = false;
        for (std::int32_t other : node_labels_[v]) {
          if (dominates(labels_[other], other, labels_[nid], nid)) {
            dominated = true;
            break;
          }
        }
        if (dominated) {
          labels_.pop_back();
          continue;
        }
        auto& bucket = node_labels_[v];
        std::erase_if(bucket, [&](std::int32_t other) {
          if (dominates(labels_[nid], nid, labels_[other], other)) {
            labels_[other].dead = true;
            return true;
          }
          return false;
        });
        bucket.push_back(nid);
      }
      heap.push({f, static_cast<std::uint32_t>(nid)});
    }
  }

  const RoadNetwork& net_;
  RoutingWeights w_;
  std::vector<Label> labels_;
  std::vector<std::vector<std::int32_t>> node_labels_;
  std::vector<double> heuristic_;
  Dominance dominance_ = Dominance::none;
  std::vector<SegmentId> best_path_;
  double best_cost_ = kInf;
};

}  // namespace

void RoutingWeights::validate() const {
  if (!(std::isfinite(distance) && std::isfinite(time) && distance >= 0.0 &&
        time >= 0.0 && distance + time > 0.0)) {
    throw Error(ErrorKind::config,
                "routing weights must be non-negative with a positive sum");
  }
}

double path_distance(const RoadNetwork& net, std::span<const SegmentId> path) {
  double d = 0.0;
  const Segment* prev = nullptr;
  for (SegmentId id : path) {
    const Segment& seg = net.segment(id);
    if (prev != nullptr && prev->to != seg.from) {
      throw Error(ErrorKind::structural,
                  "path is not contiguous at segment " + std::to_string(id.value));
    }
    d += seg.length_km;
    prev = &seg;
  }
  return d;
}

double path_est_time(const RoadNetwork& net, std::span<const SegmentId> path,
                     double depart_epoch_s) {
  double entry = minute_of_day(depart_epoch_s);
  double est = 0.0;
  const Segment* prev = nullptr;
  for (SegmentId id : path) {
    const Segment& seg = net.segment(id);
    if (prev != nullptr && prev->to != seg.from) {
      throw Error(ErrorKind::structural,
                  "path is not contiguous at segment " + std::to_string(id.value));
    }
    const double tt = segment_travel_time(seg, entry);
    est += tt;
    entry += tt;
    prev = &seg;
  }
  return est;
}

double plan_cost(const RoutePlanStep& plan, const RoutingWeights& w) {
  return w.distance * plan.distance_km + w.time * plan.est_time_min;
}

RoutePlanStep route_plan(const RoadNetwork& net, SegmentId origin, SegmentId dest,
                         double depart_epoch_s, const RoutingWeights& w) {
  w.validate();
  const Index o = net.segment_index(origin);
  const Index d = net.segment_index(dest);
  if (o == d) {
    return RoutePlanStep{{}, depart_epoch_s, 0.0, 0.0};
  }
  LabelSearch search(net, w);
  return search.run(o, d, depart_epoch_s);
}

DistanceTree distance_tree(const RoadNetwork& net, RoadNetwork::Index source_node) {
  DistanceTree tree;
  static_dijkstra(
      net, source_node, false, [&](Index s) { return net.segment_at(s).length_km; },
      tree.dist_km, tree.pred);
  return tree;
}

std::vector<RoadNetwork::Index> tree_path(const RoadNetwork& net, const DistanceTree& tree,
                                          RoadNetwork::Index target_node) {
  if (!std::isfinite(tree.dist_km[target_node])) {
    throw Error(ErrorKind::no_route, "node not reachable in distance tree");
  }
  // The source is the unique node at distance zero with no predecessor.
  Index source = target_node;
  while (tree.pred[source] >= 0) source = net.tail(static_cast<Index>(tree.pred[source]));
  return walk_back(net, tree.pred, source, target_node);
}

}  // namespace detour

#include "detour/map_matching.hpp"

#include "detour/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace detour {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxCachedTrees = 4096;
}  // namespace

void validate_trajectory(const RoadNetwork& net, const AbstractTrajectory& atr) {
  if (atr.steps.empty()) {
    throw Error(ErrorKind::structural, "abstract trajectory is empty");
  }
  for (std::size_t i = 0; i < atr.steps.size(); ++i) {
    const auto& step = atr.steps[i];
    if (!net.has_segment(step.segment)) {
      throw Error(ErrorKind::structural,
                  "trajectory references unknown segment " + std::to_string(step.segment.value));
    }
    if (!std::isfinite(step.t)) {
      throw Error(ErrorKind::structural, "trajectory has a non-finite timestamp");
    }
    if (i == 0) continue;
    const auto& prev = atr.steps[i - 1];
    if (!(step.t > prev.t)) {
      throw Error(ErrorKind::structural,
                  "trajectory timestamps not strictly increasing at step " + std::to_string(i));
    }
    if (net.segment(prev.segment).to != net.segment(step.segment).from) {
      throw Error(ErrorKind::structural,
                  "trajectory gap between steps " + std::to_string(i - 1) + " and " +
                      std::to_string(i));
    }
  }
}

void MatchConfig::validate() const {
  if (!(emission_sigma_m > 0.0 && candidate_radius_m > 0.0 && transition_beta > 0.0 &&
        max_candidates > 0)) {
    throw Error(ErrorKind::config, "match config parameters must be positive");
  }
}

MapMatcher::MapMatcher(const RoadNetwork& net, MatchConfig cfg) : net_(net), cfg_(cfg) {
  cfg_.validate();
  if (net_.node_count() == 0) {
    throw Error(ErrorKind::input, "cannot match against an empty network");
  }
  double lat = 0.0;
  double lng = 0.0;
  for (const auto& n : net_.nodes()) {
    lat += n.pos.lat;
    lng += n.pos.lng;
  }
  const double count = static_cast<double>(net_.node_count());
  frame_ = LocalFrame({lat / count, lng / count});

  node_xy_.reserve(net_.node_count());
  double max_x = -kInf;
  double max_y = -kInf;
  min_x_ = kInf;
  min_y_ = kInf;
  for (const auto& n : net_.nodes()) {
    const auto xy = frame_.project(n.pos);
    node_xy_.push_back(xy);
    min_x_ = std::min(min_x_, xy.x);
    min_y_ = std::min(min_y_, xy.y);
    max_x = std::max(max_x, xy.x);
    max_y = std::max(max_y, xy.y);
  }
  cell_m_ = std::max(250.0, cfg_.candidate_radius_m);
  const double pad = cfg_.candidate_radius_m + cell_m_;
  min_x_ -= pad;
  min_y_ -= pad;
  grid_w_ = static_cast<std::size_t>((max_x + pad - min_x_) / cell_m_) + 1;
  grid_h_ = static_cast<std::size_t>((max_y + pad - min_y_) / cell_m_) + 1;
  cells_.assign(grid_w_ * grid_h_, {});

  const double r = cfg_.candidate_radius_m;
  for (RoadNetwork::Index s = 0; s < net_.segment_count(); ++s) {
    const auto& a = node_xy_[net_.tail(s)];
    const auto& b = node_xy_[net_.head(s)];
    const auto x0 = static_cast<std::size_t>((std::min(a.x, b.x) - r - min_x_) / cell_m_);
    const auto x1 = static_cast<std::size_t>((std::max(a.x, b.x) + r - min_x_) / cell_m_);
    const auto y0 = static_cast<std::size_t>((std::min(a.y, b.y) - r - min_y_) / cell_m_);
    const auto y1 = static_cast<std::size_t>((std::max(a.y, b.y) + r - min_y_) / cell_m_);
    for (std::size_t y = y0; y <= y1 && y < grid_h_; ++y) {
      for (std::size_t x = x0; x <= x1 && x < grid_w_; ++x) {
        cells_[y * grid_w_ + x].push_back(s);
      }
    }
  }
}

std::vector<Candidate> MapMatcher::candidates(const GpsPoint& p) const {
  std::vector<Candidate> out;
  const auto xy = frame_.project(p.position());
  const double cx = (xy.x - min_x_) / cell_m_;
  const double cy = (xy.y - min_y_) / cell_m_;
  if (cx < 0.0 || cy < 0.0) return out;
  const auto ix = static_cast<std::size_t>(cx);
  const auto iy = static_cast<std::size_t>(cy);
  if (ix >= grid_w_ || iy >= grid_h_) return out;

  for (RoadNetwork::Index s : cells_[iy * grid_w_ + ix]) {
    const auto& a = node_xy_[net_.tail(s)];
    const auto& b = node_xy_[net_.head(s)];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double u = len2 > 0.0 ? ((xy.x - a.x) * dx + (xy.y - a.y) * dy) / len2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    const double px = a.x + u * dx - xy.x;
    const double py = a.y + u * dy - xy.y;
    const double d = std::sqrt(px * px + py * py);
    if (d <= cfg_.candidate_radius_m) {
      out.push_back({s, u * net_.segment_at(s).length_km * 1000.0, d});
    }
  }
  if (out.size() > cfg_.max_candidates) {
    std::sort(out.begin(), out.end(), [](const Candidate& x, const Candidate& y) {
      if (x.distance_m != y.distance_m) return x.distance_m < y.distance_m;
      return x.segment < y.segment;
    });
    out.resize(cfg_.max_candidates);
  }
  std::sort(out.begin(), out.end(),
            [](const Candidate& x, const Candidate& y) { return x.segment < y.segment; });
  return out;
}

double MapMatcher::emission_log_prob(const Candidate& c) const {
  const double sigma = cfg_.emission_sigma_m;
  const double z = c.distance_m / sigma;
  return -std::log(std::sqrt(2.0 * std::numbers::pi) * sigma) - 0.5 * z * z;
}

const DistanceTree& MapMatcher::tree_from(RoadNetwork::Index node) {
  auto it = trees_.find(node);
  if (it != trees_.end()) return it->second;
  if (trees_.size() >= kMaxCachedTrees) trees_.clear();
  return trees_.emplace(node, distance_tree(net_, node)).first->second;
}

double MapMatcher::route_distance_m(const Candidate& from, const Candidate& to) {
  if (from.segment == to.segment && to.offset_m >= from.offset_m) {
    return to.offset_m - from.offset_m;
  }
  const double remain = net_.segment_at(from.segment).length_km * 1000.0 - from.offset_m;
  const auto& tree = tree_from(net_.head(from.segment));
  const double between = tree.dist_km[net_.tail(to.segment)];
  if (!std::isfinite(between)) return kInf;
  return remain + between * 1000.0 + to.offset_m;
}

double MapMatcher::transition_log_prob(const GpsPoint& a, const Candidate& ca,
                                       const GpsPoint& b, const Candidate& cb) {
  const double route = route_distance_m(ca, cb);
  if (!std::isfinite(route)) return -kInf;
  const double gc = haversine_km(a.position(), b.position()) * 1000.0;
  const double beta = cfg_.transition_beta;
  return -std::log(beta) - std::abs(route - gc) / beta;
}

MatchLattice MapMatcher::build_lattice(std::span<const GpsPoint> points) {
  MatchLattice lattice;
  lattice.candidates.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    auto cands = candidates(points[k]);
    if (cands.empty()) {
      throw Error(ErrorKind::unmatched_point,
                  "GPS point " + std::to_string(k) + " has no segment within " +
                      std::to_string(cfg_.candidate_radius_m) + " m");
    }
    std::vector<double> em;
    em.reserve(cands.size());
    for (const auto& c : cands) em.push_back(emission_log_prob(c));
    lattice.candidates.push_back(std::move(cands));
    lattice.emission.push_back(std::move(em));
  }
  lattice.transition.resize(points.size());
  for (std::size_t k = 1; k < points.size(); ++k) {
    const auto& prev = lattice.candidates[k - 1];
    const auto& cur = lattice.candidates[k];
    auto& tr = lattice.transition[k];
    tr.assign(prev.size(), std::vector<double>(cur.size(), -kInf));
    for (std::size_t i = 0; i < prev.size(); ++i) {
      for (std::size_t j = 0; j < cur.size(); ++j) {
        tr[i][j] = transition_log_prob(points[k - 1], prev[i], points[k], cur[j]);
      }
    }
  }
  return lattice;
}

std::vector<std::size_t> MapMatcher::decode(const MatchLattice& lattice) {
  const std::size_t n = lattice.candidates.size();
  if (n == 0) return {};
  std::vector<std::vector<double>> score(n);
  std::vector<std::vector<std::size_t>> back(n);
  score[0] = lattice.emission[0];
  back[0].assign(score[0].size(), 0);
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t m = lattice.candidates[k].size();
    score[k].assign(m, -kInf);
    back[k].assign(m, 0);
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
      double best = -kInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < score[k - 1].size(); ++i) {
        const double s = score[k - 1][i] + lattice.transition[k][i][j];
        if (s > best) {
          best = s;
          arg = i;
        }
      }
      if (best > -kInf) {
        score[k][j] = best + lattice.emission[k][j];
        back[k][j] = arg;
        any = true;
      }
    }
    if (!any) {
      throw Error(ErrorKind::unmatched_point,
                  "GPS point " + std::to_string(k) +
                      " has no candidate reachable from the previous point");
    }
  }
  std::vector<std::size_t> states(n);
  double best = -kInf;
  for (std::size_t j = 0; j < score[n - 1].size(); ++j) {
    if (score[n - 1][j] > best) {
      best = score[n - 1][j];
      states[n - 1] = j;
    }
  }
  for (std::size_t k = n - 1; k > 0; --k) states[k - 1] = back[k][states[k]];
  return states;
}

AbstractTrajectory MapMatcher::assemble(std::span<const GpsPoint> points,
                                        const MatchLattice& lattice,
                                        const std::vector<std::size_t>& states,
                                        std::string trip_id) {
  AbstractTrajectory atr;
  atr.trip_id = std::move(trip_id);
  auto push = [&](RoadNetwork::Index seg, double t) {
    const SegmentId id = net_.segment_at(seg).id;
    if (!atr.steps.empty() && atr.steps.back().segment == id) return;
    atr.steps.push_back({id, t});
  };

  const Candidate* prev = &lattice.candidates[0][states[0]];
  push(prev->segment, points[0].t);
  for (std::size_t k = 1; k < points.size(); ++k) {
    const Candidate& cur = lattice.candidates[k][states[k]];
    if (cur.segment == prev->segment && cur.offset_m >= prev->offset_m) {
      prev = &cur;
      continue;
    }
    // Fill the segments driven between the two fixes, with entry times
    // interpolated by distance.
    const auto& tree = tree_from(net_.head(prev->segment));
    const auto between = tree_path(net_, tree, net_.tail(cur.segment));
    const double t0 = points[k - 1].t;
    const double t1 = points[k].t;
    const double total = route_distance_m(*prev, cur);
    double covered = net_.segment_at(prev->segment).length_km * 1000.0 - prev->offset_m;
    for (RoadNetwork::Index s : between) {
      double t = t0 + (t1 - t0) * (total > 0.0 ? covered / total : 0.5);
      const double last = atr.steps.back().t;
      if (!(t > last && t < t1)) t = last + (t1 - last) * 0.5;
      push(s, t);
      covered += net_.segment_at(s).length_km * 1000.0;
    }
    push(cur.segment, t1);
    prev = &cur;
  }
  return atr;
}

AbstractTrajectory MapMatcher::match(std::span<const GpsPoint> points, std::string trip_id) {
  if (points.size() < 2) {
    throw Error(ErrorKind::input, "map matching needs at least two GPS points");
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!valid_coordinate(points[k].position())) {
      throw Error(ErrorKind::input, "GPS point " + std::to_string(k) + " has bad coordinates");
    }
    if (k > 0 && !(points[k].t > points[k - 1].t)) {
      throw Error(ErrorKind::input,
                  "GPS timestamps not strictly increasing at point " + std::to_string(k));
    }
  }
  const auto lattice = build_lattice(points);
  const auto states = decode(lattice);
  auto atr = assemble(points, lattice, states, std::move(trip_id));
  validate_trajectory(net_, atr);
  return atr;
}

AbstractTrajectory match_trajectory(const RoadNetwork& net, std::span<const GpsPoint> points,
                                    const MatchConfig& cfg, std::string trip_id) {
  MapMatcher matcher(net, cfg);
  return matcher.match(points, std::move(trip_id));
}

}  // namespace detour

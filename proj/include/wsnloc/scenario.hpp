#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wsnloc/core.hpp"

namespace wsnloc {

/// Range noise whose standard deviation grows linearly with distance:
/// sigma(d) = sigma0 + k_sigma * d.
struct NoiseModel {
  double sigma0 = 0.2;
  double k_sigma = 0.01;

  double sigma(double d) const { return sigma0 + k_sigma * d; }

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

enum class AnchorPreset { net1, net2, net3, explicit_list };

inline std::string_view to_string(AnchorPreset p) {
  switch (p) {
    case AnchorPreset::net1: return "net1";
    case AnchorPreset::net2: return "net2";
    case AnchorPreset::net3: return "net3";
    case AnchorPreset::explicit_list: return "explicit";
  }
  return "explicit";
}

inline AnchorPreset anchor_preset_from_string(std::string_view s) {
  if (s == "net1") return AnchorPreset::net1;
  if (s == "net2") return AnchorPreset::net2;
  if (s == "net3") return AnchorPreset::net3;
  if (s == "explicit") return AnchorPreset::explicit_list;
  throw ConfigError("unknown anchor layout '" + std::string(s) + "'");
}

struct ScenarioConfig {
  double area_side = 50.0;
  double radio_range = 12.0;
  NoiseModel noise;
  AnchorPreset anchor_layout = AnchorPreset::net1;
  std::vector<Point> anchor_positions;  // used only with explicit_list
  int agent_count = 100;
  // Wraps distances around the square (torus metric). Used to validate the
  // analytic link-count formulas without boundary truncation.
  bool torus = false;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Anchor coordinates for a preset. net1/net2 place 12 anchors evenly on a
/// ring of radius 0.4a around the area center plus one at the center; net3 is
/// a 3x3 grid with margin a/6. explicit_list returns `explicit_points` as is.
inline std::vector<Point> anchor_layout(AnchorPreset preset, double area_side,
                                        std::span<const Point> explicit_points = {}) {
  std::vector<Point> out;
  const double a = area_side;
  switch (preset) {
    case AnchorPreset::net1:
    case AnchorPreset::net2: {
      const Point c{a / 2.0, a / 2.0};
      const double r = 0.4 * a;
      for (int k = 0; k < 12; ++k) {
        const double th = 2.0 * std::numbers::pi * k / 12.0;
        out.push_back({c.x + r * std::cos(th), c.y + r * std::sin(th)});
      }
      out.push_back(c);
      break;
    }
    case AnchorPreset::net3: {
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) {
          out.push_back({a / 6.0 + col * a / 3.0, a / 6.0 + row * a / 3.0});
        }
      }
      break;
    }
    case AnchorPreset::explicit_list:
      out.assign(explicit_points.begin(), explicit_points.end());
      break;
  }
  return out;
}

/// Disk detection model: two nodes hear each other iff their distance is at
/// most R (boundary inclusive).
inline bool detect(Point a, Point b, double radio_range) { return distance(a, b) <= radio_range; }

inline void validate(const ScenarioConfig& cfg) {
  if (!(cfg.area_side > 0.0)) throw ConfigError("area_side must be positive");
  if (!(cfg.radio_range > 0.0)) throw ConfigError("radio_range must be positive");
  if (cfg.agent_count < 0) throw ConfigError("agent_count must be non-negative");
  if (cfg.noise.sigma0 < 0.0 || cfg.noise.k_sigma < 0.0) throw ConfigError("noise parameters must be non-negative");
  if (cfg.anchor_layout == AnchorPreset::explicit_list) {
    if (cfg.anchor_positions.empty()) throw ConfigError("at least one anchor is required");
    for (const Point& p : cfg.anchor_positions) {
      if (p.x < 0.0 || p.y < 0.0 || p.x > cfg.area_side || p.y > cfg.area_side) {
        throw ConfigError("anchor position outside the deployment area");
      }
    }
  }
}

/// A generated network. Positions are indexed by NodeId - 1; agents come
/// first (1..N) followed by anchors (N+1..N+M).
class Scenario {
 public:
  Scenario() = default;
  Scenario(ScenarioConfig config, std::uint64_t seed, std::vector<Point> agents, std::vector<Point> anchors)
      : config_(std::move(config)), seed_(seed), agent_count_(agents.size()) {
    positions_ = std::move(agents);
    positions_.insert(positions_.end(), anchors.begin(), anchors.end());
  }

  const ScenarioConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  double area_side() const { return config_.area_side; }
  double radio_range() const { return config_.radio_range; }
  const NoiseModel& noise() const { return config_.noise; }

  std::size_t agent_count() const { return agent_count_; }
  std::size_t anchor_count() const { return positions_.size() - agent_count_; }
  std::size_t node_count() const { return positions_.size(); }

  bool contains(NodeId id) const { return id.value >= 1 && id.value <= positions_.size(); }
  bool is_anchor(NodeId id) const { return id.value > agent_count_; }
  bool is_agent(NodeId id) const { return id.value >= 1 && id.value <= agent_count_; }

  Point position(NodeId id) const {
    if (!contains(id)) throw IntegrityError("unknown node " + std::to_string(id.value));
    return positions_[id.value - 1];
  }
  const std::vector<Point>& positions() const { return positions_; }

  std::vector<NodeId> agents() const { return ids(1, agent_count_); }
  std::vector<NodeId> anchors() const { return ids(agent_count_ + 1, positions_.size()); }
  std::vector<NodeId> nodes() const { return ids(1, positions_.size()); }

  /// True distance between two nodes, honoring the torus metric if enabled.
  double true_distance(NodeId a, NodeId b) const {
    const Point p = position(a);
    const Point q = position(b);
    if (!config_.torus) return distance(p, q);
    const double side = config_.area_side;
    double dx = std::abs(p.x - q.x);
    double dy = std::abs(p.y - q.y);
    dx = std::min(dx, side - dx);
    dy = std::min(dy, side - dy);
    return std::hypot(dx, dy);
  }

  bool detects(NodeId a, NodeId b) const { return true_distance(a, b) <= config_.radio_range; }

  std::uint64_t fingerprint() const {
    Fnv1a h;
    h.add(seed_);
    h.add(agent_count_);
    for (const Point& p : positions_) {
      h.add(p.x);
      h.add(p.y);
    }
    return h.value();
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;

 private:
  static std::vector<NodeId> ids(std::size_t first, std::size_t last) {
    std::vector<NodeId> out;
    for (std::size_t i = first; i <= last; ++i) out.emplace_back(static_cast<std::uint32_t>(i));
    return out;
  }

  ScenarioConfig config_;
  std::uint64_t seed_ = 0;
  std::size_t agent_count_ = 0;
  std::vector<Point> positions_;
};

/// Places agents uniformly over the square and anchors at the configured
/// layout. Pure function of (config, seed).
inline Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  validate(config);
  std::vector<Point> anchors = anchor_layout(config.anchor_layout, config.area_side, config.anchor_positions);
  if (anchors.empty()) throw ConfigError("at least one anchor is required");
  Rng rng(derive_seed(seed, tag(Stream::placement)));
  std::uniform_real_distribution<double> coord(0.0, config.area_side);
  std::vector<Point> agents;
  agents.reserve(static_cast<std::size_t>(config.agent_count));
  for (int i = 0; i < config.agent_count; ++i) {
    const double x = coord(rng);
    const double y = coord(rng);
    agents.push_back({x, y});
  }
  return Scenario(config, seed, std::move(agents), std::move(anchors));
}

struct Edge {
  NodeId a;  // smaller id
  NodeId b;  // larger id

  static Edge make(NodeId u, NodeId v) { return u < v ? Edge{u, v} : Edge{v, u}; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// One symmetric range measurement per unordered node pair.
class MeasurementSet {
 public:
  void set(NodeId u, NodeId v, double d) { entries_[Edge::make(u, v)] = d; }

  bool contains(NodeId u, NodeId v) const { return entries_.contains(Edge::make(u, v)); }

  double at(NodeId u, NodeId v) const {
    auto it = entries_.find(Edge::make(u, v));
    if (it == entries_.end()) {
      throw IntegrityError("no measurement for pair (" + std::to_string(u.value) + ", " + std::to_string(v.value) + ")");
    }
    return it->second;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<Edge, double>& entries() const { return entries_; }

  std::uint64_t fingerprint() const {
    Fnv1a h;
    for (const auto& [e, d] : entries_) {
      h.add(e.a.value);
      h.add(e.b.value);
      h.add(d);
    }
    return h.value();
  }

  friend bool operator==(const MeasurementSet&, const MeasurementSet&) = default;

 private:
  std::map<Edge, double> entries_;
};

/// Draws d~ = d + n, n ~ N(0, sigma(d)^2), once per edge in ascending edge
/// order. Non-positive draws are redrawn.
inline MeasurementSet measure_distances(const Scenario& scenario, std::span<const Edge> edges, std::uint64_t seed) {
  MeasurementSet out;
  std::vector<Edge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end());
  Rng rng(derive_seed(seed, tag(Stream::measurement)));
  std::normal_distribution<double> unit(0.0, 1.0);
  for (const Edge& e : sorted) {
    if (!scenario.contains(e.a) || !scenario.contains(e.b)) {
      throw IntegrityError("edge references unknown node");
    }
    const double d = scenario.true_distance(e.a, e.b);
    const double sigma = scenario.noise().sigma(d);
    double measured = d;
    if (sigma > 0.0) {
      do {
        measured = d + sigma * unit(rng);
      } while (measured <= 0.0);
    }
    out.set(e.a, e.b, measured);
  }
  return out;
}

}  // namespace wsnloc

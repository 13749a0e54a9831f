#pragma once

// Independent oracles and fixtures shared by the test binaries. Nothing here
// calls into the code under test except plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "wsnloc/wsnloc.hpp"

namespace wsnloc::testing {

/// Scenario with hand-placed nodes: agents get ids 1..N, anchors N+1..N+M.
inline Scenario make_scenario(std::vector<Point> agents, std::vector<Point> anchors, double area_side = 50.0,
                              double radio_range = 12.0, NoiseModel noise = {}) {
  ScenarioConfig cfg;
  cfg.area_side = area_side;
  cfg.radio_range = radio_range;
  cfg.noise = noise;
  cfg.anchor_layout = AnchorPreset::explicit_list;
  cfg.anchor_positions = anchors;
  cfg.agent_count = static_cast<int>(agents.size());
  return Scenario(cfg, 0, std::move(agents), std::move(anchors));
}

/// Posterior mean of one agent position on a regular grid, with a flat prior
/// over the box and independent Gaussian range likelihoods
/// N(r_j; |x - a_j|, sigma(r_j)^2).
inline Point grid_posterior_mean(std::span<const Point> anchors, std::span<const double> ranges, NoiseModel noise,
                                 double x0, double x1, double y0, double y1, double step) {
  std::vector<double> xs, ys, ll;
  double best = -std::numeric_limits<double>::infinity();
  for (double x = x0; x <= x1 + 1e-12; x += step) {
    for (double y = y0; y <= y1 + 1e-12; y += step) {
      double l = 0.0;
      for (std::size_t j = 0; j < anchors.size(); ++j) {
        const double s = noise.sigma(ranges[j]);
        const double r = std::hypot(x - anchors[j].x, y - anchors[j].y) - ranges[j];
        l -= 0.5 * r * r / (s * s);
      }
      xs.push_back(x);
      ys.push_back(y);
      ll.push_back(l);
      best = std::max(best, l);
    }
  }
  double w_sum = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < ll.size(); ++k) {
    const double w = std::exp(ll[k] - best);
    w_sum += w;
    mx += w * xs[k];
    my += w * ys[k];
  }
  return {mx / w_sum, my / w_sum};
}

/// Minimum total weight over all spanning forests of a small graph, by
/// enumerating every edge subset of the right size and rejecting cycles.
inline double brute_force_msf_weight(std::size_t n_nodes, const std::vector<Edge>& edges,
                                     const std::vector<double>& weights) {
  auto components = [&](std::uint32_t mask, bool* acyclic) {
    std::vector<std::size_t> parent(n_nodes);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::size_t comps = n_nodes;
    *acyclic = true;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!(mask >> e & 1U)) continue;
      const std::size_t a = find(edges[e].a.value - 1), b = find(edges[e].b.value - 1);
      if (a == b) {
        *acyclic = false;
      } else {
        parent[a] = b;
        --comps;
      }
    }
    return comps;
  };
  bool dummy = true;
  const std::size_t target = n_nodes - components((1U << edges.size()) - 1U, &dummy);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1U << edges.size()); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != target) continue;
    bool acyclic = true;
    components(mask, &acyclic);
    if (!acyclic) continue;
    double w = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (mask >> e & 1U) w += weights[e];
    }
    best = std::min(best, w);
  }
  return best;
}

/// Unweighted hop distance from the nearest of `sources`, -1 if unreachable.
inline std::vector<int> hop_distances(std::size_t n_nodes, const std::vector<Edge>& edges,
                                      const std::vector<NodeId>& sources) {
  std::vector<std::vector<std::size_t>> adj(n_nodes);
  for (const Edge& e : edges) {
    adj[e.a.value - 1].push_back(e.b.value - 1);
    adj[e.b.value - 1].push_back(e.a.value - 1);
  }
  std::vector<int> dist(n_nodes, -1);
  std::deque<std::size_t> queue;
  for (NodeId s : sources) {
    dist[s.value - 1] = 0;
    queue.push_back(s.value - 1);
  }
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Upper 0.001 quantile of the chi-square distribution with 24 degrees of
/// freedom (5x5 binning).
inline constexpr double kChiSquare24At001 = 51.179;

/// Entropy in nats of an isotropic bivariate Gaussian with per-axis std s.
inline double isotropic_gaussian_entropy(double s) {
  return 1.0 + std::log(2.0 * std::numbers::pi) + 2.0 * std::log(s);
}

}  // namespace wsnloc::testing

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <vector>

#include "wsnloc/scenario.hpp"

namespace wsnloc {

/// Undirected disk-model connectivity. Neighbor lists are kept sorted by
/// ascending NodeId; every traversal in the library relies on that order.
class ConnectivityGraph {
 public:
  ConnectivityGraph() = default;

  explicit ConnectivityGraph(std::size_t node_count) : neighbors_(node_count) {}

  /// Adds the undirected edge (u, v). Self-loops and duplicates are rejected.
  void add_edge(NodeId u, NodeId v) {
    check(u);
    check(v);
    if (u == v) throw IntegrityError("self-loop on node " + std::to_string(u.value));
    auto& nu = neighbors_[u.value - 1];
    auto pos = std::lower_bound(nu.begin(), nu.end(), v);
    if (pos != nu.end() && *pos == v) return;
    nu.insert(pos, v);
    auto& nv = neighbors_[v.value - 1];
    nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
    edges_.insert(std::lower_bound(edges_.begin(), edges_.end(), Edge::make(u, v)), Edge::make(u, v));
  }

  std::size_t node_count() const { return neighbors_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  const std::vector<NodeId>& neighbors(NodeId id) const {
    check(id);
    return neighbors_[id.value - 1];
  }

  bool has_edge(NodeId u, NodeId v) const {
    if (!contains(u) || !contains(v)) return false;
    const auto& nu = neighbors_[u.value - 1];
    return std::binary_search(nu.begin(), nu.end(), v);
  }

  bool contains(NodeId id) const { return id.value >= 1 && id.value <= neighbors_.size(); }

  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out;
    for (std::size_t i = 1; i <= neighbors_.size(); ++i) out.emplace_back(static_cast<std::uint32_t>(i));
    return out;
  }

 private:
  void check(NodeId id) const {
    if (!contains(id)) throw IntegrityError("unknown node " + std::to_string(id.value));
  }

  std::vector<std::vector<NodeId>> neighbors_;
  std::vector<Edge> edges_;
};

inline ConnectivityGraph build_connectivity(const Scenario& scenario) {
  ConnectivityGraph g(scenario.node_count());
  const auto n = static_cast<std::uint32_t>(scenario.node_count());
  for (std::uint32_t u = 1; u <= n; ++u) {
    for (std::uint32_t v = u + 1; v <= n; ++v) {
      if (scenario.detects(NodeId(u), NodeId(v))) g.add_edge(NodeId(u), NodeId(v));
    }
  }
  return g;
}

inline MeasurementSet measure_distances(const Scenario& scenario, const ConnectivityGraph& graph, std::uint64_t seed) {
  return measure_distances(scenario, std::span<const Edge>(graph.edges()), seed);
}

/// Spanning forest over a subset of the parent graph's edges.
struct TreeGraph {
  std::vector<Edge> retained_edges;  // sorted ascending
  std::vector<NodeId> roots;
  std::vector<NodeId> unreachable;  // nodes not connected to any root (BFS only)

  bool contains(NodeId u, NodeId v) const {
    return std::binary_search(retained_edges.begin(), retained_edges.end(), Edge::make(u, v));
  }

  /// Restricts a connectivity graph to the retained edges.
  ConnectivityGraph as_graph(std::size_t node_count) const {
    ConnectivityGraph g(node_count);
    for (const Edge& e : retained_edges) g.add_edge(e.a, e.b);
    return g;
  }
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

}  // namespace detail

/// Breadth-first spanning forest rooted at a node set, visiting neighbors in
/// ascending NodeId. The search grows from all roots at once, so every node
/// keeps its hop distance to the nearest root along the tree; sub-trees that
/// share a connected component are then joined through the smallest remaining
/// edges, giving n-1 edges per reachable component.
inline TreeGraph bfs_spanning_tree(const ConnectivityGraph& graph, const std::vector<NodeId>& roots) {
  if (roots.empty()) throw ConfigError("BFS spanning tree needs at least one root");
  TreeGraph tree;
  tree.roots = roots;
  std::sort(tree.roots.begin(), tree.roots.end());
  std::vector<char> seen(graph.node_count(), 0);
  std::deque<NodeId> queue;
  for (NodeId r : tree.roots) {
    if (!graph.contains(r)) throw IntegrityError("root " + std::to_string(r.value) + " not in graph");
    if (!seen[r.value - 1]) {
      seen[r.value - 1] = 1;
      queue.push_back(r);
    }
  }
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : graph.neighbors(u)) {
      if (seen[v.value - 1]) continue;
      seen[v.value - 1] = 1;
      tree.retained_edges.push_back(Edge::make(u, v));
      queue.push_back(v);
    }
  }
  detail::DisjointSets sets(graph.node_count());
  for (const Edge& e : tree.retained_edges) sets.unite(e.a.value - 1, e.b.value - 1);
  for (const Edge& e : graph.edges()) {
    if (seen[e.a.value - 1] && sets.unite(e.a.value - 1, e.b.value - 1)) tree.retained_edges.push_back(e);
  }
  for (NodeId id : graph.nodes()) {
    if (!seen[id.value - 1]) tree.unreachable.push_back(id);
  }
  std::sort(tree.retained_edges.begin(), tree.retained_edges.end());
  return tree;
}

/// Kruskal minimum spanning forest. Ties are broken by the ascending edge key
/// (smaller id, larger id).
inline TreeGraph min_spanning_tree(const ConnectivityGraph& graph, const std::map<Edge, double>& weights) {
  std::vector<std::pair<double, Edge>> order;
  order.reserve(graph.edges().size());
  for (const Edge& e : graph.edges()) {
    auto it = weights.find(e);
    if (it == weights.end()) {
      throw IntegrityError("missing weight for edge (" + std::to_string(e.a.value) + ", " + std::to_string(e.b.value) + ")");
    }
    order.emplace_back(it->second, e);
  }
  std::sort(order.begin(), order.end());
  detail::DisjointSets sets(graph.node_count());
  TreeGraph tree;
  for (const auto& [w, e] : order) {
    if (sets.unite(e.a.value - 1, e.b.value - 1)) tree.retained_edges.push_back(e);
  }
  std::sort(tree.retained_edges.begin(), tree.retained_edges.end());
  return tree;
}

inline TreeGraph min_spanning_tree(const ConnectivityGraph& graph, const MeasurementSet& measurements) {
  return min_spanning_tree(graph, measurements.entries());
}

enum class LinkMode { undirected, directed_messages };

/// Undirected mode counts edges; directed mode counts message slots, two per
/// edge.
inline std::size_t count_links(std::span<const Edge> edges, LinkMode mode) {
  return mode == LinkMode::undirected ? edges.size() : 2 * edges.size();
}

/// Edge list as CSV: node_a,node_b,true_distance,measured_distance.
inline void write_edge_csv(std::ostream& os, const Scenario& scenario, const ConnectivityGraph& graph,
                           const MeasurementSet& measurements) {
  const auto old_precision = os.precision(9);
  os << "node_a,node_b,true_distance,measured_distance\n";
  for (const Edge& e : graph.edges()) {
    os << e.a.value << ',' << e.b.value << ',' << scenario.true_distance(e.a, e.b) << ','
       << measurements.at(e.a, e.b) << '\n';
  }
  os.precision(old_precision);
}

}  // namespace wsnloc

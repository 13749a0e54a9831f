#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "support.hpp"

namespace wsnloc {
namespace {

NodeId n(std::uint32_t v) { return NodeId(v); }

ConnectivityGraph make_graph(std::size_t nodes, std::initializer_list<std::pair<int, int>> edges) {
  ConnectivityGraph g(nodes);
  for (auto [a, b] : edges) g.add_edge(n(a), n(b));
  return g;
}

bool is_forest(std::size_t nodes, const std::vector<Edge>& edges) {
  detail::DisjointSets sets(nodes);
  for (const Edge& e : edges) {
    if (!sets.unite(e.a.value - 1, e.b.value - 1)) return false;
  }
  return true;
}

void expect_consistent(const ConnectivityGraph& g) {
  std::size_t degree_sum = 0;
  for (NodeId u : g.nodes()) {
    for (NodeId v : g.neighbors(u)) {
      EXPECT_NE(u, v);
      EXPECT_TRUE(g.has_edge(v, u));
      EXPECT_TRUE(std::binary_search(g.edges().begin(), g.edges().end(), Edge::make(u, v)));
    }
    EXPECT_TRUE(std::is_sorted(g.neighbors(u).begin(), g.neighbors(u).end()));
    degree_sum += g.neighbors(u).size();
  }
  EXPECT_EQ(degree_sum, 2 * g.edges().size());
}

TEST(Connectivity, TwoNodesAtExactlyRangeAreLinked) {
  const Scenario s = testing::make_scenario({{0, 0}}, {{0, 12}});
  const ConnectivityGraph g = build_connectivity(s);
  EXPECT_EQ(g.edges().size(), 1u);
  EXPECT_TRUE(g.has_edge(n(1), n(2)));
}

TEST(Connectivity, DistantNodesHaveNoEdges) {
  const Scenario s = testing::make_scenario({{0, 0}, {20, 0}}, {{40, 0}, {0, 40}});
  EXPECT_TRUE(build_connectivity(s).edges().empty());
}

// Agents A..D are ids 1..4, anchors 1..5 are ids 5..9.
Scenario fig1_scenario() {
  return testing::make_scenario({{10, 10}, {20, 10}, {15, 18}, {22, 24}},
                                {{6, 4}, {3, 12}, {9, 19}, {25, 3}, {28, 16}}, 40, 10);
}

TEST(Connectivity, ExampleTopology) {
  const ConnectivityGraph g = build_connectivity(fig1_scenario());
  const NodeId A = n(1), B = n(2), C = n(3), D = n(4);
  for (NodeId v : {n(5), n(6), n(7), B, C}) EXPECT_TRUE(g.has_edge(A, v)) << v.value;
  EXPECT_FALSE(g.has_edge(A, D));
  EXPECT_EQ(g.neighbors(D), (std::vector<NodeId>{C, n(9)}));
  expect_consistent(g);
}

TEST(Connectivity, NeighborSetsMatchEdges) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Scenario s = generate_scenario(preset_config(NetworkPreset::net1), seed);
    const ConnectivityGraph g = build_connectivity(s);
    expect_consistent(g);
    for (const Edge& e : g.edges()) EXPECT_LE(s.true_distance(e.a, e.b), 12.0);
  }
}

TEST(Connectivity, RejectsSelfLoopsAndUnknownNodes) {
  ConnectivityGraph g(3);
  EXPECT_THROW(g.add_edge(n(1), n(1)), IntegrityError);
  EXPECT_THROW(g.add_edge(n(1), n(4)), IntegrityError);
  g.add_edge(n(1), n(2));
  g.add_edge(n(2), n(1));
  EXPECT_EQ(g.edges().size(), 1u);
}

TEST(BfsTree, PathGraph) {
  const ConnectivityGraph g = make_graph(3, {{1, 2}, {2, 3}});
  const TreeGraph t = bfs_spanning_tree(g, {n(1)});
  EXPECT_EQ(t.retained_edges, (std::vector<Edge>{Edge::make(n(1), n(2)), Edge::make(n(2), n(3))}));
  EXPECT_TRUE(t.unreachable.empty());
}

TEST(BfsTree, EmptyRootSetIsConfigError) {
  const ConnectivityGraph g = make_graph(3, {{1, 2}});
  EXPECT_THROW(bfs_spanning_tree(g, {}), ConfigError);
}

TEST(BfsTree, IsolatedNodeIsUnreachable) {
  const ConnectivityGraph g = make_graph(4, {{1, 2}, {2, 3}, {1, 3}});
  const TreeGraph t = bfs_spanning_tree(g, {n(1)});
  EXPECT_EQ(t.unreachable, (std::vector<NodeId>{n(4)}));
  EXPECT_EQ(t.retained_edges.size(), 2u);
}

TEST(BfsTree, NetworkScaleInvariants) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scenario s = generate_scenario(preset_config(NetworkPreset::net1), seed);
    const ConnectivityGraph g = build_connectivity(s);
    const TreeGraph t = bfs_spanning_tree(g, s.anchors());
    EXPECT_TRUE(is_forest(g.node_count(), t.retained_edges));
    for (const Edge& e : t.retained_edges) EXPECT_TRUE(g.has_edge(e.a, e.b));

    // n-1 edges per component reachable from the roots.
    const auto reach = testing::hop_distances(g.node_count(), g.edges(), s.anchors());
    std::size_t reachable = 0;
    for (int d : reach) reachable += d >= 0;
    EXPECT_EQ(t.unreachable.size(), g.node_count() - reachable);
    detail::DisjointSets comps(g.node_count());
    std::size_t n_comps = reachable;
    for (const Edge& e : g.edges()) {
      if (reach[e.a.value - 1] >= 0 && comps.unite(e.a.value - 1, e.b.value - 1)) --n_comps;
    }
    EXPECT_EQ(t.retained_edges.size(), reachable - n_comps);

    // Distance to the root set along the tree equals hop distance in the graph.
    EXPECT_EQ(testing::hop_distances(g.node_count(), t.retained_edges, s.anchors()), reach);
  }
}

TEST(BfsTree, ConnectedGraphKeepsNMinusOneEdges) {
  // Complete graph on 6 nodes rooted at two nodes.
  ConnectivityGraph g(6);
  for (std::uint32_t a = 1; a <= 6; ++a) {
    for (std::uint32_t b = a + 1; b <= 6; ++b) g.add_edge(n(a), n(b));
  }
  const TreeGraph t = bfs_spanning_tree(g, {n(5), n(2)});
  EXPECT_EQ(t.retained_edges.size(), 5u);
  EXPECT_TRUE(is_forest(6, t.retained_edges));
}

TEST(MinTree, TriangleKeepsTwoLightestEdges) {
  const ConnectivityGraph g = make_graph(3, {{1, 2}, {2, 3}, {1, 3}});
  const std::map<Edge, double> w = {
      {Edge::make(n(1), n(2)), 1.0}, {Edge::make(n(2), n(3)), 2.0}, {Edge::make(n(1), n(3)), 3.0}};
  EXPECT_EQ(min_spanning_tree(g, w).retained_edges,
            (std::vector<Edge>{Edge::make(n(1), n(2)), Edge::make(n(2), n(3))}));
}

TEST(MinTree, EqualWeightsBreakTiesByEdgeKey) {
  const ConnectivityGraph g = make_graph(3, {{1, 2}, {2, 3}, {1, 3}});
  const std::map<Edge, double> w = {
      {Edge::make(n(1), n(2)), 1.0}, {Edge::make(n(2), n(3)), 1.0}, {Edge::make(n(1), n(3)), 1.0}};
  EXPECT_EQ(min_spanning_tree(g, w).retained_edges,
            (std::vector<Edge>{Edge::make(n(1), n(2)), Edge::make(n(1), n(3))}));
}

TEST(MinTree, ForestInput) {
  const ConnectivityGraph g = make_graph(6, {{1, 2}, {2, 3}, {1, 3}, {4, 5}, {5, 6}});
  std::map<Edge, double> w;
  for (const Edge& e : g.edges()) w[e] = 1.0 + e.a.value;
  const TreeGraph t = min_spanning_tree(g, w);
  EXPECT_EQ(t.retained_edges.size(), 4u);
  EXPECT_TRUE(is_forest(6, t.retained_edges));
}

TEST(MinTree, MissingWeightIsIntegrityError) {
  const ConnectivityGraph g = make_graph(3, {{1, 2}, {2, 3}});
  const std::map<Edge, double> w = {{Edge::make(n(1), n(2)), 1.0}};
  EXPECT_THROW(min_spanning_tree(g, w), IntegrityError);
}

TEST(MinTree, MatchesBruteForceOnSmallGraphs) {
  Rng rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t nodes = 4 + trial % 5;  // 4..8
    ConnectivityGraph g(nodes);
    for (std::uint32_t a = 1; a <= nodes; ++a) {
      for (std::uint32_t b = a + 1; b <= nodes; ++b) {
        if (unit(rng) < 0.45 && g.edges().size() < 18) g.add_edge(n(a), n(b));
      }
    }
    std::map<Edge, double> w;
    std::vector<double> wv;
    for (const Edge& e : g.edges()) {
      w[e] = std::round(unit(rng) * 8.0);  // integer weights force ties
      wv.push_back(w[e]);
    }
    const TreeGraph t = min_spanning_tree(g, w);
    double total = 0.0;
    for (const Edge& e : t.retained_edges) total += w.at(e);
    EXPECT_TRUE(is_forest(nodes, t.retained_edges));
    EXPECT_DOUBLE_EQ(total, testing::brute_force_msf_weight(nodes, g.edges(), wv)) << "trial " << trial;
  }
}

TEST(CountLinks, Examples) {
  std::vector<Edge> tree;
  for (std::uint32_t k = 1; k < 100; ++k) tree.push_back(Edge::make(n(k), n(k + 1)));
  EXPECT_EQ(count_links(tree, LinkMode::directed_messages), 198u);
  EXPECT_EQ(count_links(std::span<const Edge>{}, LinkMode::directed_messages), 0u);
  EXPECT_EQ(count_links(std::span<const Edge>(tree).first(5), LinkMode::undirected), 5u);
}

TEST(EdgeCsv, HeaderAndRows) {
  const Scenario s = testing::make_scenario({{0, 0}}, {{3, 4}});
  const ConnectivityGraph g = build_connectivity(s);
  MeasurementSet m;
  m.set(n(1), n(2), 5.25);
  std::ostringstream os;
  write_edge_csv(os, s, g, m);
  EXPECT_EQ(os.str(), "node_a,node_b,true_distance,measured_distance\n1,2,5,5.25\n");
}

}  // namespace
}  // namespace wsnloc

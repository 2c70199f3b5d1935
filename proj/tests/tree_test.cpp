#include <gtest/gtest.h>

#include <random>

#include "dnmtp/experiment.hpp"
#include "dnmtp/tree.hpp"
#include "support.hpp"

namespace dnmtp {
namespace {

using testing::graph_cycle;
using testing::graph_path;
using testing::graph_star;

TEST(ShpTree, PathGraph) {
  const auto t = build_shp_tree(graph_path(3), {0, {2}});
  EXPECT_EQ(t.parent, (std::map<NodeId, NodeId>{{1, 0}, {2, 1}}));
  EXPECT_EQ(t.arc_count(), 2u);
}

TEST(ShpTree, Star) {
  const auto t = build_shp_tree(graph_star(2), {0, {1, 2}});
  EXPECT_EQ(t.parent, (std::map<NodeId, NodeId>{{1, 0}, {2, 0}}));
}

TEST(ShpTree, CycleUsesDisjointBranches) {
  const auto t = build_shp_tree(graph_cycle(4), {0, {1, 3}});
  EXPECT_EQ(t.parent, (std::map<NodeId, NodeId>{{1, 0}, {3, 0}}));
}

TEST(ShpTree, DepthEqualsHopDistance) {
  const Graph g = generate_waxman(120, 0.15, 0.2, 2, 3);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto req = sample_request(g, 1 + i % 25, rng);
    const auto t = build_shp_tree(g, req);
    ASSERT_FALSE(validate_tree(t, req, &g).has_value());
    const IndexedTree it(t);
    const auto dist = hop_distances(g, req.source);
    for (NodeId r : req.destinations) EXPECT_EQ(it.depth(it.index(r)), dist[r]);
    EXPECT_EQ(build_shp_tree(g, req), t);
  }
}

TEST(SttTree, SingleDestinationIsShortestPath) {
  const Graph g = generate_waxman(80, 0.15, 0.2, 2, 5);
  const auto dist = hop_distances(g, 4);
  for (NodeId r : {0, 33, 79}) {
    const MulticastRequest req{4, {r}};
    const auto t = build_stt_tree(g, req);
    EXPECT_FALSE(validate_tree(t, req, &g).has_value());
    EXPECT_EQ(static_cast<int>(t.arc_count()), dist[r]);
  }
}

TEST(SttTree, StarIsKept) {
  const auto t = build_stt_tree(graph_star(4), {0, {1, 2, 3, 4}});
  EXPECT_EQ(t.parent, (std::map<NodeId, NodeId>{{1, 0}, {2, 0}, {3, 0}, {4, 0}}));
}

TEST(SttTree, NearestDestinationOrder) {
  // e=0, a=1, b=2, r1=3, r2=4; path e-a-b plus a-r1, b-r2.
  const Graph g = Graph::from_edges(5, {}, {{0, 1}, {1, 2}, {1, 3}, {2, 4}});
  const auto t = build_stt_tree(g, {0, {3, 4}});
  EXPECT_EQ(t.parent, (std::map<NodeId, NodeId>{{1, 0}, {2, 1}, {3, 1}, {4, 2}}));
  EXPECT_EQ(t.arc_count(), 4u);
}

TEST(SttTree, SharesMoreThanShp) {
  // Square 0-1-2-3-0 plus pendant 2-4: ShP reaches 1 and 3 directly, the
  // Steiner heuristic may reuse the tree built so far.
  const Graph g = Graph::from_edges(5, {}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {2, 4}});
  const MulticastRequest req{0, {1, 3, 4}};
  EXPECT_FALSE(validate_tree(build_stt_tree(g, req), req, &g).has_value());
  EXPECT_LE(build_stt_tree(g, req).arc_count(), build_shp_tree(g, req).arc_count());
}

TEST(SttTree, TwoApproximationAgainstExactSteiner) {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 300; ++iter) {
    std::uniform_int_distribution<int> nd(3, 10);
    const int n = nd(rng);
    const Graph g = testing::random_connected_graph(rng, n, 0.2);
    std::uniform_int_distribution<int> rd(1, n - 1);
    const auto req = sample_request(g, rd(rng), rng);
    const auto t = build_stt_tree(g, req);
    ASSERT_FALSE(validate_tree(t, req, &g).has_value());
    std::set<NodeId> terminals = req.destinations;
    terminals.insert(req.source);
    const int opt = testing::exact_steiner_edges(g, terminals);
    EXPECT_LE(static_cast<int>(t.arc_count()), 2 * opt);
    EXPECT_GE(static_cast<int>(t.arc_count()), opt);
    EXPECT_EQ(build_stt_tree(g, req), t);
  }
}

TEST(ValidateTree, AcceptsBuiltTrees) {
  const Graph g = graph_cycle(6);
  const MulticastRequest req{0, {2, 3, 5}};
  EXPECT_FALSE(validate_tree(build_shp_tree(g, req), req, &g).has_value());
  EXPECT_FALSE(validate_tree(build_stt_tree(g, req), req, &g).has_value());
}

TEST(ValidateTree, ReportsNamedViolations) {
  const Graph g = graph_path(4);
  const MulticastRequest req{0, {2}};
  RootedTree t = build_shp_tree(g, req);

  RootedTree extra_leaf = t;
  extra_leaf.parent.emplace(3, 2);  // 3 is a leaf but not a destination
  auto v = validate_tree(extra_leaf, req, &g);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, "leaf-not-destination");

  const MulticastRequest both{0, {1, 2}};
  RootedTree bad_arc = build_shp_tree(g, both);
  bad_arc.parent[2] = 0;  // 0-2 is not an edge
  v = validate_tree(bad_arc, both, &g);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, "arc-not-in-graph");

  RootedTree wrong_root = t;
  wrong_root.root = 1;
  EXPECT_EQ(validate_tree(wrong_root, req, &g)->kind, "root-mismatch");

  RootedTree cyc;
  cyc.root = 0;
  cyc.parent = {{1, 2}, {2, 1}};
  cyc.destinations = {2};
  EXPECT_EQ(validate_tree(cyc, {0, {2}})->kind, "cycle");

  RootedTree dangling = t;
  dangling.parent[2] = 9;
  EXPECT_EQ(validate_tree(dangling, req)->kind, "dangling-parent");

  EXPECT_EQ(validate_tree(t, {0, {1, 2}})->kind, "destinations-mismatch");
}

TEST(IndexedTree, OrdersAndRejects) {
  const IndexedTree it(testing::tree_t1());
  EXPECT_EQ(it.size(), 6);
  EXPECT_EQ(it.id(0), 0);
  for (int u = 1; u < it.size(); ++u) EXPECT_LT(it.parent(u), u);
  EXPECT_EQ(it.subtree_dests(0), 2);
  EXPECT_EQ(it.depth(it.index(testing::T1Ids::r2)), 3);

  RootedTree leaf_not_dest = testing::tree_t1();
  leaf_not_dest.destinations = {testing::T1Ids::r1};
  EXPECT_THROW(IndexedTree{leaf_not_dest}, Error);

  RootedTree cyc;
  cyc.root = 0;
  cyc.parent = {{1, 2}, {2, 1}};
  EXPECT_THROW(IndexedTree{cyc}, Error);
}

}  // namespace
}  // namespace dnmtp

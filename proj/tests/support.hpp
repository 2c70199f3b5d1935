#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "dnmtp/graph.hpp"
#include "dnmtp/tree.hpp"

namespace dnmtp::testing {

// T1: e->c, c->x, x->r1, c->y, y->r2 with R = {r1, r2}.
struct T1Ids {
  static constexpr NodeId e = 0, c = 1, x = 2, r1 = 3, y = 4, r2 = 5;
};
inline RootedTree tree_t1() {
  using I = T1Ids;
  RootedTree t;
  t.root = I::e;
  t.parent = {{I::c, I::e}, {I::x, I::c}, {I::r1, I::x}, {I::y, I::c}, {I::r2, I::y}};
  t.destinations = {I::r1, I::r2};
  return t;
}

// T4: e->m->r2 with R = {m, r2}; m is an internal destination.
inline RootedTree tree_t4() {
  RootedTree t;
  t.root = 0;
  t.parent = {{1, 0}, {2, 1}};
  t.destinations = {1, 2};
  return t;
}

// Star: root 0, leaf destinations 1..leaves.
inline RootedTree tree_star(int leaves) {
  RootedTree t;
  t.root = 0;
  for (int i = 1; i <= leaves; ++i) {
    t.parent.emplace(i, 0);
    t.destinations.insert(i);
  }
  return t;
}

// Chain 0 -> 1 -> ... -> len, last node the only destination.
inline RootedTree tree_chain(int len) {
  RootedTree t;
  t.root = 0;
  for (int i = 1; i <= len; ++i) t.parent.emplace(i, i - 1);
  t.destinations = {len};
  return t;
}

inline Graph graph_path(int n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph::from_edges(n, {}, e);
}

inline Graph graph_cycle(int n) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
  return Graph::from_edges(n, {}, e);
}

inline Graph graph_star(int leaves) {
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return Graph::from_edges(leaves + 1, {}, e);
}

// Random rooted tree with at most max_nodes nodes and at most max_dests
// destinations (all leaves plus some internal nodes). Node ids are a random
// injection into [0, 3n) so local order differs from id order.
inline RootedTree random_tree(std::mt19937_64& rng, int max_nodes, int max_dests) {
  std::uniform_int_distribution<int> size_dist(2, max_nodes);
  while (true) {
    const int n = size_dist(rng);
    std::uniform_int_distribution<int> width_dist(1, n);
    const int width = width_dist(rng);
    std::vector<int> parent(static_cast<std::size_t>(n), -1);
    std::vector<int> kids(static_cast<std::size_t>(n), 0);
    for (int i = 1; i < n; ++i) {
      std::uniform_int_distribution<int> p(std::max(0, i - width), i - 1);
      parent[i] = p(rng);
      ++kids[parent[i]];
    }
    std::set<int> dests;
    for (int i = 1; i < n; ++i)
      if (kids[i] == 0) dests.insert(i);
    if (static_cast<int>(dests.size()) > max_dests) continue;
    std::bernoulli_distribution coin(0.3);
    for (int i = 1; i < n && static_cast<int>(dests.size()) < max_dests; ++i)
      if (kids[i] > 0 && coin(rng)) dests.insert(i);

    std::vector<NodeId> ids(static_cast<std::size_t>(3 * n));
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    RootedTree t;
    t.root = ids[0];
    for (int i = 1; i < n; ++i) t.parent.emplace(ids[i], ids[parent[i]]);
    for (int d : dests) t.destinations.insert(ids[d]);
    return t;
  }
}

inline std::set<NodeId> random_subset(std::mt19937_64& rng, const std::vector<NodeId>& pool,
                                      double p) {
  std::bernoulli_distribution coin(p);
  std::set<NodeId> out;
  for (NodeId v : pool)
    if (coin(rng)) out.insert(v);
  return out;
}

// Random connected graph: random spanning tree plus extra edges.
inline Graph random_connected_graph(std::mt19937_64& rng, int n, double extra_p) {
  std::set<std::pair<NodeId, NodeId>> e;
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> p(0, i - 1);
    const int j = p(rng);
    e.emplace(j, i);
  }
  std::bernoulli_distribution coin(extra_p);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (coin(rng)) e.emplace(u, v);
  return Graph::from_edges(n, {}, {e.begin(), e.end()});
}

// Minimum Steiner tree size (in edges) by enumerating vertex supersets of the
// terminals whose induced subgraph is connected. Only for tiny graphs.
inline int exact_steiner_edges(const Graph& g, const std::set<NodeId>& terminals) {
  const int n = g.size();
  unsigned term_mask = 0;
  for (NodeId t : terminals) term_mask |= 1u << t;
  int best = n;
  for (unsigned s = 0; s < (1u << n); ++s) {
    if ((s & term_mask) != term_mask) continue;
    const int size = __builtin_popcount(s);
    if (size - 1 >= best) continue;
    const int start = __builtin_ctz(s);
    unsigned seen = 1u << start;
    std::vector<int> stack{start};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (NodeId v : g.neighbors(u))
        if ((s >> v & 1u) && !(seen >> v & 1u)) {
          seen |= 1u << v;
          stack.push_back(v);
        }
    }
    if (seen == s) best = size - 1;
  }
  return best;
}

}  // namespace dnmtp::testing

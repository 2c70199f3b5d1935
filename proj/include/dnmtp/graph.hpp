#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dnmtp {

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Symmetric directed graph with unit arc weights. Each undirected edge {u,v}
// stands for the arc pair u->v, v->u. Immutable once built.
class Graph {
 public:
  Graph() = default;

  // Throws Error on self-loops, duplicate edges or out-of-range ids.
  static Graph from_edges(int n, std::vector<Point> coords,
                          const std::vector<std::pair<NodeId, NodeId>>& edges) {
    if (n < 0) throw Error("graph: negative node count");
    if (!coords.empty() && static_cast<int>(coords.size()) != n)
      throw Error("graph: coords size does not match node count");
    Graph g;
    g.coords_ = std::move(coords);
    if (g.coords_.empty()) g.coords_.resize(static_cast<std::size_t>(n));
    g.adj_.resize(static_cast<std::size_t>(n));
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw Error("graph: edge (" + std::to_string(u) + "," +
                    std::to_string(v) + ") references an unknown node");
      if (u == v) throw Error("graph: self-loop at node " + std::to_string(u));
      g.adj_[u].push_back(v);
      g.adj_[v].push_back(u);
    }
    for (NodeId u = 0; u < n; ++u) {
      auto& a = g.adj_[u];
      std::sort(a.begin(), a.end());
      if (std::adjacent_find(a.begin(), a.end()) != a.end())
        throw Error("graph: parallel edge at node " + std::to_string(u));
    }
    return g;
  }

  int size() const { return static_cast<int>(adj_.size()); }
  bool valid(NodeId u) const { return u >= 0 && u < size(); }

  const std::vector<NodeId>& neighbors(NodeId u) const { return adj_.at(u); }
  const Point& coord(NodeId u) const { return coords_.at(u); }
  const std::vector<Point>& coords() const { return coords_; }

  bool has_arc(NodeId u, NodeId v) const {
    if (!valid(u) || !valid(v)) return false;
    const auto& a = adj_[u];
    return std::binary_search(a.begin(), a.end(), v);
  }

  // Number of undirected edges (arc pairs).
  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& a : adj_) twice += a.size();
    return twice / 2;
  }

  // Each edge once, u < v, in lexicographic order.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < size(); ++u)
      for (NodeId v : adj_[u])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  bool is_connected() const {
    if (size() <= 1) return true;
    std::vector<char> seen(adj_.size(), 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : adj_[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    return count == size();
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    if (a.adj_ != b.adj_ || a.coords_.size() != b.coords_.size()) return false;
    for (std::size_t i = 0; i < a.coords_.size(); ++i)
      if (a.coords_[i].x != b.coords_[i].x || a.coords_[i].y != b.coords_[i].y)
        return false;
    return true;
  }

 private:
  std::vector<Point> coords_;
  std::vector<std::vector<NodeId>> adj_;
};

struct MulticastRequest {
  NodeId source = kNoNode;
  std::set<NodeId> destinations;
};

inline void check_request(const Graph& g, const MulticastRequest& req) {
  if (!g.valid(req.source))
    throw Error("request: source " + std::to_string(req.source) +
                " is not a graph node");
  if (req.destinations.empty()) throw Error("request: no destinations");
  for (NodeId r : req.destinations) {
    if (!g.valid(r))
      throw Error("request: destination " + std::to_string(r) +
                  " is not a graph node");
    if (r == req.source)
      throw Error("request: source " + std::to_string(r) +
                  " is also a destination");
  }
}

struct WaxmanParams {
  int n = 200;
  double alpha = 0.15;
  double beta = 0.2;
  int m = 2;
  std::uint64_t seed = 0;
  double plane_side = 1000.0;
};

namespace detail {

// One incremental Waxman attempt. Returns false when some node cannot attach
// (all candidate weights underflow), which leaves the graph disconnected.
inline bool waxman_attempt(const WaxmanParams& p, std::uint64_t seed,
                           Graph& out) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, p.plane_side);
  std::vector<Point> pts(static_cast<std::size_t>(p.n));
  for (auto& pt : pts) {
    pt.x = coord(rng);
    pt.y = coord(rng);
  }
  const double max_dist = p.plane_side * std::sqrt(2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<double> weight;
  for (NodeId u = 1; u < p.n; ++u) {
    weight.assign(static_cast<std::size_t>(u), 0.0);
    for (NodeId v = 0; v < u; ++v)
      weight[v] = p.alpha * std::exp(-distance(pts[u], pts[v]) /
                                     (p.beta * max_dist));
    const int links = std::min(p.m, u);
    for (int l = 0; l < links; ++l) {
      const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
      if (!(total > 0.0)) return false;
      double x = unit(rng) * total;
      NodeId pick = kNoNode;
      for (NodeId v = 0; v < u; ++v) {
        if (weight[v] <= 0.0) continue;
        pick = v;
        if (x < weight[v]) break;
        x -= weight[v];
      }
      edges.emplace_back(pick, u);
      weight[pick] = 0.0;
    }
  }
  out = Graph::from_edges(p.n, std::move(pts), edges);
  return out.is_connected();
}

}  // namespace detail

// Incremental Waxman topology: nodes are placed uniformly in the plane, then
// each node in turn attaches to min(m, #earlier nodes) distinct earlier nodes
// drawn with probability proportional to alpha * exp(-d / (beta * L)).
inline Graph generate_waxman(const WaxmanParams& p) {
  if (p.n < 1) throw Error("waxman: need at least one node");
  if (p.m < 1) throw Error("waxman: m must be >= 1");
  if (p.n > 1 && p.m >= p.n)
    throw Error("waxman: m=" + std::to_string(p.m) +
                " links cannot attach in a graph of " + std::to_string(p.n) +
                " nodes");
  if (!(p.alpha > 0.0 && p.alpha <= 1.0) || !(p.beta > 0.0 && p.beta <= 1.0))
    throw Error("waxman: alpha and beta must lie in (0, 1]");

  constexpr int kRetries = 100;
  Graph g;
  for (int attempt = 0; attempt <= kRetries; ++attempt)
    if (detail::waxman_attempt(p, p.seed + static_cast<std::uint64_t>(attempt), g))
      return g;
  throw Error("waxman: could not produce a connected graph after " +
              std::to_string(kRetries) + " reseeds");
}

inline Graph generate_waxman(int n, double alpha, double beta, int m,
                             std::uint64_t seed) {
  return generate_waxman(WaxmanParams{n, alpha, beta, m, seed, 1000.0});
}

struct ShortestPathTree {
  std::vector<int> dist;       // hops; -1 when unreachable
  std::vector<NodeId> parent;  // kNoNode for the source and unreachable nodes
};

// Unweighted BFS. Among equal-distance predecessors the smallest id is the
// parent.
inline ShortestPathTree shortest_path_tree(const Graph& g, NodeId source) {
  if (!g.valid(source))
    throw Error("bfs: source " + std::to_string(source) + " is not a node");
  ShortestPathTree t;
  t.dist.assign(static_cast<std::size_t>(g.size()), -1);
  t.parent.assign(static_cast<std::size_t>(g.size()), kNoNode);
  std::queue<NodeId> q;
  t.dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop();
    for (NodeId v : g.neighbors(u)) {
      if (t.dist[v] < 0) {
        t.dist[v] = t.dist[u] + 1;
        t.parent[v] = u;
        q.push(v);
      } else if (t.dist[v] == t.dist[u] + 1 && u < t.parent[v]) {
        t.parent[v] = u;
      }
    }
  }
  return t;
}

inline std::vector<int> hop_distances(const Graph& g, NodeId source) {
  return shortest_path_tree(g, source).dist;
}

struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num * b.den == b.num * a.den;
  }
};

inline Rational average_degree(const Graph& g) {
  if (g.size() < 1) throw Error("average_degree: empty graph");
  long long num = 2 * static_cast<long long>(g.edge_count());
  long long den = g.size();
  const long long c = std::gcd(num, den);
  return {num / c, den / c};
}

}  // namespace dnmtp

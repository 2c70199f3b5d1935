#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dnmtp/graph.hpp"

namespace dnmtp {

// Multicast tree as stored and exchanged: root, parent of every non-root
// node, destination flags. May be malformed; see validate_tree and
// IndexedTree.
struct RootedTree {
  NodeId root = kNoNode;
  std::map<NodeId, NodeId> parent;
  std::set<NodeId> destinations;

  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out;
    out.reserve(parent.size() + 1);
    out.push_back(root);
    for (const auto& [v, p] : parent) out.push_back(v);
    std::sort(out.begin(), out.end());
    return out;
  }
  std::size_t arc_count() const { return parent.size(); }

  friend bool operator==(const RootedTree&, const RootedTree&) = default;
};

// Dense, validated view of a RootedTree. Local index 0 is the root; indices
// follow BFS order with children visited in ascending node id, so iterating
// indices in reverse processes every node after all of its descendants.
class IndexedTree {
 public:
  explicit IndexedTree(const RootedTree& t) {
    std::map<NodeId, std::vector<NodeId>> kids;
    for (const auto& [v, p] : t.parent) {
      if (v == t.root) throw Error("tree: root " + std::to_string(v) + " has a parent");
      kids[p].push_back(v);
    }
    ids_.push_back(t.root);
    parent_.push_back(-1);
    depth_.push_back(0);
    index_.emplace(t.root, 0);
    for (std::size_t head = 0; head < ids_.size(); ++head) {
      auto it = kids.find(ids_[head]);
      children_.emplace_back();
      if (it == kids.end()) continue;
      std::sort(it->second.begin(), it->second.end());
      for (NodeId c : it->second) {
        if (index_.count(c)) throw Error("tree: node " + std::to_string(c) + " reached twice");
        const int ci = static_cast<int>(ids_.size());
        index_.emplace(c, ci);
        ids_.push_back(c);
        parent_.push_back(static_cast<int>(head));
        depth_.push_back(depth_[head] + 1);
        children_[head].push_back(ci);
      }
    }
    if (ids_.size() != t.parent.size() + 1)
      throw Error("tree: parent map has a cycle or a node detached from the root");

    dest_.assign(ids_.size(), 0);
    for (NodeId r : t.destinations) {
      auto it = index_.find(r);
      if (it == index_.end())
        throw Error("tree: destination " + std::to_string(r) + " is not a tree node");
      if (it->second == 0) throw Error("tree: root is a destination");
      dest_[it->second] = 1;
    }
    subtree_dests_.assign(ids_.size(), 0);
    for (int u = size() - 1; u >= 0; --u) {
      if (children_[u].empty() && u != 0 && !dest_[u])
        throw Error("tree: leaf " + std::to_string(ids_[u]) + " is not a destination");
      subtree_dests_[u] += dest_[u];
      if (u > 0) subtree_dests_[parent_[u]] += subtree_dests_[u];
    }
  }

  int size() const { return static_cast<int>(ids_.size()); }
  NodeId id(int u) const { return ids_[u]; }
  int index(NodeId v) const {
    auto it = index_.find(v);
    return it == index_.end() ? -1 : it->second;
  }
  int parent(int u) const { return parent_[u]; }
  const std::vector<int>& children(int u) const { return children_[u]; }
  bool is_dest(int u) const { return dest_[u] != 0; }
  bool is_leaf(int u) const { return children_[u].empty(); }
  int depth(int u) const { return depth_[u]; }
  int subtree_dests(int u) const { return subtree_dests_[u]; }
  int dest_count() const { return subtree_dests_[0]; }

 private:
  std::vector<NodeId> ids_;
  std::unordered_map<NodeId, int> index_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<char> dest_;
  std::vector<int> depth_;
  std::vector<int> subtree_dests_;
};

struct TreeViolation {
  std::string kind;
  std::string detail;
};

// Checks every RootedTree invariant against the request (and the graph when
// given). Returns the first violation found, in the order checked below.
inline std::optional<TreeViolation> validate_tree(const RootedTree& t,
                                                  const MulticastRequest& req,
                                                  const Graph* g = nullptr) {
  auto fail = [](std::string kind, std::string detail) {
    return std::optional<TreeViolation>(TreeViolation{std::move(kind), std::move(detail)});
  };
  if (t.root != req.source)
    return fail("root-mismatch", "root " + std::to_string(t.root) + " != source " +
                                     std::to_string(req.source));
  if (t.parent.count(t.root))
    return fail("root-has-parent", "root " + std::to_string(t.root));
  for (const auto& [v, p] : t.parent)
    if (p != t.root && !t.parent.count(p))
      return fail("dangling-parent", "parent " + std::to_string(p) + " of node " +
                                         std::to_string(v) + " is not in the tree");
  // Every parent chain must reach the root within |parent| steps.
  for (const auto& [v, p] : t.parent) {
    NodeId cur = v;
    std::size_t steps = 0;
    while (cur != t.root && steps <= t.parent.size()) {
      cur = t.parent.at(cur);
      ++steps;
    }
    if (cur != t.root) return fail("cycle", "node " + std::to_string(v));
  }
  if (t.destinations != req.destinations)
    return fail("destinations-mismatch", "tree destination flags differ from the request");
  for (NodeId r : t.destinations) {
    if (r == t.root) return fail("root-is-destination", "node " + std::to_string(r));
    if (!t.parent.count(r))
      return fail("destination-not-in-tree", "node " + std::to_string(r));
  }
  std::set<NodeId> internal;
  for (const auto& [v, p] : t.parent) internal.insert(p);
  for (const auto& [v, p] : t.parent)
    if (!internal.count(v) && !t.destinations.count(v))
      return fail("leaf-not-destination", "leaf " + std::to_string(v));
  if (g) {
    for (const auto& [v, p] : t.parent)
      if (!g->has_arc(p, v))
        return fail("arc-not-in-graph",
                    "arc " + std::to_string(p) + "->" + std::to_string(v));
  }
  return std::nullopt;
}

// Drops non-destination leaves repeatedly until every leaf is a destination.
inline void prune_to_destinations(RootedTree& t) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::set<NodeId> internal;
    for (const auto& [v, p] : t.parent) internal.insert(p);
    for (auto it = t.parent.begin(); it != t.parent.end();) {
      if (!internal.count(it->first) && !t.destinations.count(it->first)) {
        it = t.parent.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
}

// Union of the hop-shortest source->destination paths, all read off a single
// BFS tree so that the union is itself a tree.
inline RootedTree build_shp_tree(const Graph& g, const MulticastRequest& req) {
  check_request(g, req);
  const auto spt = shortest_path_tree(g, req.source);
  RootedTree t;
  t.root = req.source;
  t.destinations = req.destinations;
  for (NodeId r : req.destinations) {
    if (spt.dist[r] < 0)
      throw Error("shp: destination " + std::to_string(r) + " is unreachable");
    for (NodeId v = r; v != req.source && !t.parent.count(v); v = spt.parent[v])
      t.parent.emplace(v, spt.parent[v]);
  }
  return t;
}

// Takahashi-Matsuyama: grow from {source}, each round attaching the
// destination nearest (in hops) to the current tree along a shortest path.
// Ties go to the smallest destination id, then to the lexicographically
// smallest path read from its tree endpoint.
inline RootedTree build_stt_tree(const Graph& g, const MulticastRequest& req) {
  check_request(g, req);
  const int n = g.size();
  std::vector<char> in_tree(static_cast<std::size_t>(n), 0);
  in_tree[req.source] = 1;
  std::vector<std::pair<NodeId, NodeId>> undirected;  // tree edges
  std::set<NodeId> pending = req.destinations;

  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<int> back(static_cast<std::size_t>(n));
  std::queue<NodeId> q;
  auto bfs = [&](std::vector<int>& d, auto&& is_source) {
    std::fill(d.begin(), d.end(), -1);
    for (NodeId v = 0; v < n; ++v)
      if (is_source(v)) {
        d[v] = 0;
        q.push(v);
      }
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop();
      for (NodeId w : g.neighbors(u))
        if (d[w] < 0) {
          d[w] = d[u] + 1;
          q.push(w);
        }
    }
  };

  while (!pending.empty()) {
    bfs(dist, [&](NodeId v) { return in_tree[v] != 0; });
    NodeId best = kNoNode;
    for (NodeId r : pending) {
      if (dist[r] < 0) throw Error("stt: destination " + std::to_string(r) + " is unreachable");
      if (best == kNoNode || dist[r] < dist[best]) best = r;
    }
    // Distances to `best`, then walk from the smallest attachment point.
    bfs(back, [&](NodeId v) { return v == best; });
    const int len = dist[best];
    NodeId cur = kNoNode;
    for (NodeId v = 0; v < n; ++v)
      if (in_tree[v] && back[v] == len) {
        cur = v;
        break;
      }
    while (cur != best) {
      NodeId next = kNoNode;
      for (NodeId w : g.neighbors(cur))
        if (back[w] == back[cur] - 1) {
          next = w;
          break;
        }
      undirected.emplace_back(cur, next);
      in_tree[next] = 1;
      pending.erase(next);
      cur = next;
    }
    pending.erase(best);
  }

  // Orient away from the source.
  std::map<NodeId, std::vector<NodeId>> adj;
  for (const auto& [a, b] : undirected) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  RootedTree t;
  t.root = req.source;
  t.destinations = req.destinations;
  std::vector<NodeId> stack{req.source};
  std::set<NodeId> seen{req.source};
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId w : adj[u])
      if (seen.insert(w).second) {
        t.parent.emplace(w, u);
        stack.push_back(w);
      }
  }
  prune_to_destinations(t);
  return t;
}

enum class TreeMethod { kShortestPath, kSteiner };

inline const char* method_name(TreeMethod m) {
  return m == TreeMethod::kShortestPath ? "ShP" : "StT";
}

inline RootedTree build_tree(const Graph& g, const MulticastRequest& req, TreeMethod m) {
  return m == TreeMethod::kShortestPath ? build_shp_tree(g, req) : build_stt_tree(g, req);
}

}  // namespace dnmtp

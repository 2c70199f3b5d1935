#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dnmtp/tree.hpp"

namespace dnmtp {

// Diffusing (branching) nodes, by graph node id. Never contains the root.
using DiffuserSet = std::set<NodeId>;
using Load = std::int64_t;

namespace detail {

inline std::vector<char> diffuser_mask(const IndexedTree& t, const DiffuserSet& d) {
  std::vector<char> mask(static_cast<std::size_t>(t.size()), 0);
  for (NodeId v : d) {
    const int i = t.index(v);
    if (i < 0) throw Error("diffusers: node " + std::to_string(v) + " is not in the tree");
    if (i == 0) throw Error("diffusers: the root cannot be a diffuser");
    mask[i] = 1;
  }
  return mask;
}

// pn per local index; pn[0] (root) is left at 0.
inline std::vector<int> path_numbers_local(const IndexedTree& t, const std::vector<char>& in_d) {
  std::vector<int> pn(static_cast<std::size_t>(t.size()), 0);
  for (int u = t.size() - 1; u > 0; --u) {
    if (in_d[u]) {
      pn[u] = 1;
      continue;
    }
    int sum = t.is_dest(u) ? 1 : 0;
    for (int c : t.children(u)) sum += pn[c];
    pn[u] = sum;
  }
  return pn;
}

inline Load load_local(const IndexedTree& t, const std::vector<char>& in_d) {
  Load total = 0;
  for (int p : path_numbers_local(t, in_d)) total += p;
  return total;
}

}  // namespace detail

// Number of solution paths entering each non-root node.
inline std::map<NodeId, int> path_numbers(const IndexedTree& t, const DiffuserSet& d) {
  const auto pn = detail::path_numbers_local(t, detail::diffuser_mask(t, d));
  std::map<NodeId, int> out;
  for (int u = 1; u < t.size(); ++u) out.emplace(t.id(u), pn[u]);
  return out;
}

// Total arc-uses: each arc counted once per path crossing it.
inline Load load(const IndexedTree& t, const DiffuserSet& d) {
  return detail::load_local(t, detail::diffuser_mask(t, d));
}

inline Load load(const RootedTree& t, const DiffuserSet& d) { return load(IndexedTree(t), d); }

struct PathSolution {
  std::vector<std::vector<NodeId>> paths;

  Load total_length() const {
    Load s = 0;
    for (const auto& p : paths) s += static_cast<Load>(p.size()) - 1;
    return s;
  }
};

// One path from every origin (root or diffuser) to each demand point it
// dominates: destinations and diffusers reachable without crossing another
// diffuser. Paths are emitted in DFS order from the root.
inline PathSolution materialize_paths(const IndexedTree& t, const DiffuserSet& d) {
  const auto in_d = detail::diffuser_mask(t, d);
  PathSolution sol;
  std::vector<int> origins{0};
  std::vector<NodeId> trail;
  for (std::size_t oi = 0; oi < origins.size(); ++oi) {
    const int origin = origins[oi];
    // DFS below origin; trail holds ids from origin to the current node.
    auto visit = [&](auto&& self, int u) -> void {
      trail.push_back(t.id(u));
      if (u != origin && (in_d[u] || t.is_dest(u))) sol.paths.push_back(trail);
      if (u != origin && in_d[u]) {
        origins.push_back(u);
      } else {
        for (int c : t.children(u)) self(self, c);
      }
      trail.pop_back();
    };
    visit(visit, origin);
  }
  return sol;
}

// Audits a PathSolution against the four satisfaction conditions plus the
// requirement that consecutive nodes follow tree arcs downward. Returns a
// description of the first failure.
inline std::optional<std::string> check_path_solution(const IndexedTree& t, const DiffuserSet& d,
                                                      const PathSolution& sol) {
  std::map<NodeId, int> ends;
  std::set<NodeId> origins;
  for (const auto& p : sol.paths) {
    if (p.size() < 2) return "path with fewer than two nodes";
    for (std::size_t i = 1; i < p.size(); ++i) {
      const int c = t.index(p[i]);
      if (c <= 0 || t.id(t.parent(c)) != p[i - 1])
        return "path step " + std::to_string(p[i - 1]) + "->" + std::to_string(p[i]) +
               " is not a tree arc";
    }
    for (std::size_t i = 1; i + 1 < p.size(); ++i)
      if (d.count(p[i])) return "diffuser " + std::to_string(p[i]) + " inside a path";
    if (p.front() != t.id(0) && !d.count(p.front()))
      return "path origin " + std::to_string(p.front()) + " is neither root nor diffuser";
    ++ends[p.back()];
    origins.insert(p.front());
  }
  for (int u = 1; u < t.size(); ++u) {
    const NodeId v = t.id(u);
    const int e = ends.count(v) ? ends[v] : 0;
    if (t.is_dest(u) && e != 1)
      return "destination " + std::to_string(v) + " ends " + std::to_string(e) + " paths";
    if (d.count(v) && e > 1) return "diffuser " + std::to_string(v) + " ends several paths";
  }
  for (NodeId o : origins)
    if (o != t.id(0) && !ends.count(o))
      return "diffuser origin " + std::to_string(o) + " is not reached by any path";
  return std::nullopt;
}

// Window on the arc entering a node: path number, diffusers in the subtree,
// load of the subtree including that arc.
struct Window {
  int paths = 0;
  int diffusers = 0;
  Load load = 0;

  friend bool operator==(const Window&, const Window&) = default;
  // Component-wise order used to compare sub-solutions at one arc.
  bool dominated_by(const Window& o) const {
    return paths <= o.paths && diffusers <= o.diffusers && load <= o.load;
  }
};

// Windows read directly off a PathSolution by counting arc crossings; index
// by local node index, root entry unused.
inline std::vector<Window> windows_from_paths(const IndexedTree& t, const DiffuserSet& d,
                                              const PathSolution& sol) {
  std::vector<Load> crossings(static_cast<std::size_t>(t.size()), 0);
  for (const auto& p : sol.paths)
    for (std::size_t i = 1; i < p.size(); ++i) ++crossings[t.index(p[i])];
  std::vector<Window> w(static_cast<std::size_t>(t.size()));
  for (int u = t.size() - 1; u > 0; --u) {
    w[u].paths = static_cast<int>(crossings[u]);
    w[u].diffusers += d.count(t.id(u)) ? 1 : 0;
    w[u].load += crossings[u];
    const int p = t.parent(u);
    if (p > 0) {
      w[p].diffusers += w[u].diffusers;
      w[p].load += w[u].load;
    }
  }
  return w;
}

struct OracleResult {
  DiffuserSet diffusers;
  Load load = 0;
};

inline constexpr int kOracleMaxNodes = 24;

// Exhaustive search over every D with |D| <= k among non-root nodes.
// Ties resolve to the lexicographically smallest set (as a sorted id list).
inline OracleResult brute_force_optimal(const IndexedTree& t, int k) {
  if (k < 0) throw Error("oracle: negative budget");
  if (t.size() > kOracleMaxNodes)
    throw Error("oracle: tree has " + std::to_string(t.size()) + " nodes, limit is " +
                std::to_string(kOracleMaxNodes));
  // Candidates sorted by node id so combinations come out in lexicographic order.
  std::vector<int> cand;
  for (int u = 1; u < t.size(); ++u) cand.push_back(u);
  std::sort(cand.begin(), cand.end(), [&](int a, int b) { return t.id(a) < t.id(b); });
  const int n = static_cast<int>(cand.size());

  std::vector<char> mask(static_cast<std::size_t>(t.size()), 0);
  std::vector<NodeId> best_set;
  Load best = detail::load_local(t, mask);
  std::vector<int> pick;
  auto better = [&](Load l) {
    if (l != best) return l < best;
    std::vector<NodeId> ids;
    for (int i : pick) ids.push_back(t.id(cand[i]));
    return ids < best_set;
  };
  auto rec = [&](auto&& self, int start) -> void {
    if (!pick.empty()) {
      const Load l = detail::load_local(t, mask);
      if (better(l)) {
        best = l;
        best_set.clear();
        for (int i : pick) best_set.push_back(t.id(cand[i]));
      }
    }
    if (static_cast<int>(pick.size()) == k) return;
    for (int i = start; i < n; ++i) {
      pick.push_back(i);
      mask[cand[i]] = 1;
      self(self, i + 1);
      mask[cand[i]] = 0;
      pick.pop_back();
    }
  };
  rec(rec, 0);
  return {DiffuserSet(best_set.begin(), best_set.end()), best};
}

inline Load sum_of_depths(const IndexedTree& t) {
  Load s = 0;
  for (int u = 1; u < t.size(); ++u)
    if (t.is_dest(u)) s += t.depth(u);
  return s;
}

// Nodes whose diffusion makes every arc carry exactly one path.
inline DiffuserSet saturating_diffusers(const IndexedTree& t) {
  DiffuserSet d;
  for (int u = 1; u < t.size(); ++u)
    if (t.children(u).size() >= 2 || (t.is_dest(u) && !t.is_leaf(u))) d.insert(t.id(u));
  return d;
}

}  // namespace dnmtp

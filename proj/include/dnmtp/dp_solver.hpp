#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dnmtp/load.hpp"
#include "dnmtp/tree.hpp"

namespace dnmtp {

// A table entry: a load, or "no sub-solution with this window".
class Cost {
 public:
  constexpr Cost() = default;
  constexpr explicit Cost(Load v) : v_(v) {}
  static constexpr Cost infeasible() { return Cost(); }

  constexpr bool feasible() const { return v_ != kInf; }
  constexpr Load value() const { return v_; }

  friend constexpr Cost operator+(Cost a, Cost b) {
    return a.feasible() && b.feasible() ? Cost(a.v_ + b.v_) : Cost();
  }
  friend constexpr Cost operator+(Cost a, Load b) { return a.feasible() ? Cost(a.v_ + b) : Cost(); }
  friend constexpr Cost operator+(Load a, Cost b) { return b + a; }
  friend constexpr bool operator==(Cost, Cost) = default;
  friend constexpr auto operator<=>(Cost, Cost) = default;

 private:
  static constexpr Load kInf = std::numeric_limits<Load>::max();
  Load v_ = kInf;
};

// Minimum of the feasible arguments; infeasible only when both are.
constexpr Cost min_plus(Cost a, Cost b) { return b < a ? b : a; }

// M(u) and L(u) for one node. m(b, d): u not diffusing, path number b,
// exactly d diffusers in the subtree. l(d): u diffusing (path number 1),
// d diffusers including u. Loads include the arc entering u.
class NodeTables {
 public:
  NodeTables() = default;
  NodeTables(int budget, int rows)
      : budget_(budget), rows_(rows),
        m_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(budget + 1)),
        l_(static_cast<std::size_t>(budget)) {}

  int budget() const { return budget_; }
  int rows() const { return rows_; }

  Cost m(int b, int d) const {
    if (b < 1 || b > rows_ || d < 0 || d > budget_) return Cost::infeasible();
    return m_[idx(b, d)];
  }
  Cost l(int d) const {
    if (d < 1 || d > budget_) return Cost::infeasible();
    return l_[static_cast<std::size_t>(d - 1)];
  }
  void set_m(int b, int d, Cost c) { m_[idx(b, d)] = c; }
  void set_l(int d, Cost c) { l_[static_cast<std::size_t>(d - 1)] = c; }

  // Cheapest M entry over all path numbers at budget d, and its row.
  std::pair<Cost, int> best_m(int d) const {
    Cost best;
    int row = 0;
    for (int b = 1; b <= rows_; ++b)
      if (m(b, d) < best) {
        best = m(b, d);
        row = b;
      }
    return {best, row};
  }

  // Cheapest way for this subtree to use exactly d diffusers. Row 0 stands
  // for "take L"; M wins ties.
  std::pair<Cost, int> best(int d) const {
    auto [c, row] = best_m(d);
    if (l(d) < c) return {l(d), 0};
    return {c, row};
  }

  friend bool operator==(const NodeTables&, const NodeTables&) = default;

 private:
  std::size_t idx(int b, int d) const {
    return static_cast<std::size_t>(b - 1) * static_cast<std::size_t>(budget_ + 1) +
           static_cast<std::size_t>(d);
  }
  int budget_ = 0;
  int rows_ = 0;
  std::vector<Cost> m_;
  std::vector<Cost> l_;
};

// Which child state produced a table entry: the child's diffuser budget and
// its row (0 = the child diffuses, i.e. its L entry). Unset when infeasible.
struct Choice {
  std::int16_t child_budget = -1;
  std::int16_t child_row = -1;
  bool set() const { return child_budget >= 0; }
};

// Decisions of one extend/merge step, laid out like the tables it produced.
struct StageChoices {
  int budget = 0;
  int rows = 0;
  std::vector<Choice> m;
  std::vector<Choice> l;

  StageChoices() = default;
  StageChoices(int k, int r)
      : budget(k), rows(r),
        m(static_cast<std::size_t>(r) * static_cast<std::size_t>(k + 1)),
        l(static_cast<std::size_t>(k)) {}
  Choice& at_m(int b, int d) {
    return m[static_cast<std::size_t>(b - 1) * static_cast<std::size_t>(budget + 1) +
             static_cast<std::size_t>(d)];
  }
  const Choice& at_m(int b, int d) const { return const_cast<StageChoices*>(this)->at_m(b, d); }
  Choice& at_l(int d) { return l[static_cast<std::size_t>(d - 1)]; }
  const Choice& at_l(int d) const { return l[static_cast<std::size_t>(d - 1)]; }
};

struct StageResult {
  NodeTables tables;
  StageChoices choices;
};

// Unitary tables of a leaf destination: M(1,0) = 1, L(1) = 1.
inline NodeTables leaf_tables(int budget) {
  NodeTables t(budget, 1);
  t.set_m(1, 0, Cost(1));
  if (budget >= 1) t.set_l(1, Cost(1));
  return t;
}

inline NodeTables leaf_tables(const IndexedTree& tree, int u, int budget) {
  if (!tree.is_leaf(u))
    throw Error("leaf_tables: node " + std::to_string(tree.id(u)) + " has children");
  return leaf_tables(budget);
}

// Tables of u restricted to its first child, arc into u included.
inline StageResult extend_single_child(bool u_is_dest, const NodeTables& child) {
  const int k = child.budget();
  const int extra = u_is_dest ? 1 : 0;
  StageResult r{NodeTables(k, child.rows() + extra), StageChoices(k, child.rows() + extra)};

  for (int d = 1; d <= k; ++d) {
    auto [c, row] = child.best(d - 1);
    if (!c.feasible()) continue;
    r.tables.set_l(d, 1 + c);
    r.choices.at_l(d) = {static_cast<std::int16_t>(d - 1), static_cast<std::int16_t>(row)};
  }
  for (int d = 0; d <= k; ++d) {
    for (int j = 1 + extra; j <= r.tables.rows(); ++j) {
      const int jc = j - extra;
      Cost c = child.m(jc, d);
      int row = jc;
      if (jc == 1 && child.l(d) < c) {
        c = child.l(d);
        row = 0;
      }
      if (!c.feasible()) continue;
      r.tables.set_m(j, d, j + c);
      r.choices.at_m(j, d) = {static_cast<std::int16_t>(d), static_cast<std::int16_t>(row)};
    }
  }
  return r;
}

// Folds one more child into u's accumulated tables. Every path the child
// pushes upward also crosses the arc into u, hence the +j'' (or +1) term.
inline StageResult merge_child(const NodeTables& acc, const NodeTables& child) {
  const int k = acc.budget();
  if (child.budget() != k) throw Error("merge_child: budget mismatch");
  const int rows = acc.rows() + child.rows();
  StageResult r{NodeTables(k, rows), StageChoices(k, rows)};

  std::vector<std::pair<Cost, int>> child_best(static_cast<std::size_t>(k + 1));
  for (int d = 0; d <= k; ++d) child_best[d] = child.best(d);

  for (int d = 1; d <= k; ++d) {
    Cost best;
    Choice pick;
    for (int dc = 0; dc <= d - 1; ++dc) {
      const Cost c = acc.l(d - dc) + child_best[dc].first;
      if (c < best) {
        best = c;
        pick = {static_cast<std::int16_t>(dc), static_cast<std::int16_t>(child_best[dc].second)};
      }
    }
    r.tables.set_l(d, best);
    r.choices.at_l(d) = pick;
  }

  for (int d = 0; d <= k; ++d) {
    for (int j = 1; j <= rows; ++j) {
      Cost best;
      Choice pick;
      for (int dc = 0; dc <= d; ++dc) {
        const int da = d - dc;
        const int jc_max = std::min(child.rows(), j - 1);
        for (int jc = 1; jc <= jc_max; ++jc) {
          const Cost c = acc.m(j - jc, da) + child.m(jc, dc) + static_cast<Load>(jc);
          if (c < best) {
            best = c;
            pick = {static_cast<std::int16_t>(dc), static_cast<std::int16_t>(jc)};
          }
        }
        const Cost c = acc.m(j - 1, da) + child.l(dc) + Load{1};
        if (c < best) {
          best = c;
          pick = {static_cast<std::int16_t>(dc), 0};
        }
      }
      r.tables.set_m(j, d, best);
      r.choices.at_m(j, d) = pick;
    }
  }
  return r;
}

// Root step. The root originates any number of paths, has no incoming arc and
// is never charged budget: combine each child's best entry per budget,
// knapsack-style. exact[d] is the optimum with exactly d diffusers.
struct RootResult {
  std::vector<Cost> exact;                    // size k+1
  std::vector<std::vector<Choice>> choices;   // [child stage][total budget]
  int budget = 0;

  // Optimum with at most k diffusers, and the exact budget achieving it
  // (smallest such budget on ties).
  std::pair<Cost, int> at_most(int k) const {
    Cost best;
    int arg = 0;
    for (int d = 0; d <= std::min(k, budget); ++d)
      if (exact[d] < best) {
        best = exact[d];
        arg = d;
      }
    return {best, arg};
  }
};

inline RootResult finalize_root(const std::vector<const NodeTables*>& children, int k) {
  RootResult r;
  r.budget = k;
  r.exact.assign(static_cast<std::size_t>(k + 1), Cost::infeasible());
  r.exact[0] = Cost(0);
  for (const NodeTables* child : children) {
    std::vector<Cost> next(static_cast<std::size_t>(k + 1));
    std::vector<Choice> pick(static_cast<std::size_t>(k + 1));
    for (int d = 0; d <= k; ++d)
      for (int dc = 0; dc <= d; ++dc) {
        auto [cb, row] = child->best(dc);
        const Cost c = r.exact[d - dc] + cb;
        if (c < next[d]) {
          next[d] = c;
          pick[d] = {static_cast<std::int16_t>(dc), static_cast<std::int16_t>(row)};
        }
      }
    r.exact = std::move(next);
    r.choices.push_back(std::move(pick));
  }
  return r;
}

inline RootResult finalize_root(const std::vector<NodeTables>& children, int k) {
  std::vector<const NodeTables*> ptrs;
  for (const auto& c : children) ptrs.push_back(&c);
  return finalize_root(ptrs, k);
}

// Everything a solve computed, per local node index of `tree`.
struct DpTables {
  std::vector<NodeTables> tables;                 // final tables; root entry = its own
  std::vector<std::vector<int>> child_order;      // merge order per node
  std::vector<std::vector<StageChoices>> stages;  // one per merged child
  RootResult root;
};

struct Placement {
  int k = 0;
  DiffuserSet diffusers;
  Load load = 0;
  std::optional<DpTables> tables;
};

struct SolveOptions {
  bool keep_tables = false;
  // Merge children in a seeded random order instead of ascending id.
  std::optional<std::uint64_t> shuffle_children;
};

namespace detail {

inline DpTables fill_tables(const IndexedTree& t, int k, const SolveOptions& opt) {
  DpTables dp;
  const int n = t.size();
  dp.tables.resize(static_cast<std::size_t>(n));
  dp.child_order.resize(static_cast<std::size_t>(n));
  dp.stages.resize(static_cast<std::size_t>(n));
  std::optional<std::mt19937_64> rng;
  if (opt.shuffle_children) rng.emplace(*opt.shuffle_children);

  // Reverse BFS order visits nodes by non-increasing depth.
  for (int u = n - 1; u >= 0; --u) {
    if (u != 0 && t.is_leaf(u)) {
      dp.tables[u] = leaf_tables(t, u, k);
      continue;
    }
    auto& order = dp.child_order[u];
    order = t.children(u);
    if (rng) std::shuffle(order.begin(), order.end(), *rng);
    if (order.empty()) continue;  // root of a single-node tree
    auto first = extend_single_child(t.is_dest(u), dp.tables[order[0]]);
    NodeTables acc = std::move(first.tables);
    dp.stages[u].push_back(std::move(first.choices));
    for (std::size_t i = 1; i < order.size(); ++i) {
      auto step = merge_child(acc, dp.tables[order[i]]);
      acc = std::move(step.tables);
      dp.stages[u].push_back(std::move(step.choices));
    }
    dp.tables[u] = std::move(acc);
  }
  std::vector<const NodeTables*> kids;
  for (int c : dp.child_order[0]) kids.push_back(&dp.tables[c]);
  dp.root = finalize_root(kids, k);
  return dp;
}

}  // namespace detail

// Walks the stage decisions top-down and collects the diffusing nodes of the
// optimum with at most k diffusers. Throws Error if a record on the path is
// missing or inconsistent.
inline DiffuserSet extract_placement(const IndexedTree& t, const DpTables& dp, int k) {
  auto [total, budget] = dp.root.at_most(k);
  if (!total.feasible()) throw Error("extract: root has no feasible entry");
  DiffuserSet out;

  struct State {
    int node;
    int row;  // 0 = diffusing (L entry)
    int budget;
  };
  std::vector<State> work;

  const auto& root_kids = dp.child_order[0];
  if (dp.root.choices.size() != root_kids.size()) throw Error("extract: root record size mismatch");
  int remaining = budget;
  for (std::size_t s = root_kids.size(); s-- > 0;) {
    const Choice& c = dp.root.choices[s].at(static_cast<std::size_t>(remaining));
    if (!c.set()) throw Error("extract: missing root record");
    work.push_back({root_kids[s], c.child_row, c.child_budget});
    remaining -= c.child_budget;
  }
  if (remaining != 0) throw Error("extract: root budget split does not add up");

  while (!work.empty()) {
    State st = work.back();
    work.pop_back();
    const int u = st.node;
    if (st.row == 0) out.insert(t.id(u));
    if (t.is_leaf(u)) {
      if (st.budget != (st.row == 0 ? 1 : 0) || st.row > 1)
        throw Error("extract: impossible leaf state at node " + std::to_string(t.id(u)));
      continue;
    }
    const auto& order = dp.child_order[u];
    const auto& stages = dp.stages[u];
    if (stages.size() != order.size())
      throw Error("extract: missing stage records at node " + std::to_string(t.id(u)));
    int row = st.row;
    int bud = st.budget;
    for (std::size_t s = order.size(); s-- > 0;) {
      const StageChoices& sc = stages[s];
      if (bud < 0 || bud > sc.budget || row > sc.rows || (row == 0 && bud < 1))
        throw Error("extract: index out of range at node " + std::to_string(t.id(u)));
      const Choice& c = row == 0 ? sc.at_l(bud) : sc.at_m(row, bud);
      if (!c.set())
        throw Error("extract: missing record at node " + std::to_string(t.id(u)));
      work.push_back({order[s], c.child_row, c.child_budget});
      if (s == 0) break;  // first stage: the child state is all that is left
      bud -= c.child_budget;
      if (row != 0) row -= c.child_row == 0 ? 1 : c.child_row;
    }
  }
  return out;
}

// Optimal placement of at most k diffusers in the tree.
inline Placement solve_dnmtp(const IndexedTree& t, int k, const SolveOptions& opt = {}) {
  if (k < 0) throw Error("solve: negative budget");
  if (k > std::numeric_limits<std::int16_t>::max() ||
      t.size() > std::numeric_limits<std::int16_t>::max())
    throw Error("solve: instance too large for decision records");
  DpTables dp = detail::fill_tables(t, k, opt);
  Placement p;
  p.k = k;
  auto [total, budget] = dp.root.at_most(k);
  p.load = total.value();
  p.diffusers = extract_placement(t, dp, k);
  if (opt.keep_tables) p.tables = std::move(dp);
  return p;
}

inline Placement solve_dnmtp(const RootedTree& t, int k, const SolveOptions& opt = {}) {
  return solve_dnmtp(IndexedTree(t), k, opt);
}

// Optimal load for every budget 0..kmax from one table fill.
inline std::vector<Load> solve_all_budgets(const IndexedTree& t, int kmax) {
  if (kmax < 0) throw Error("solve: negative budget");
  const DpTables dp = detail::fill_tables(t, kmax, {});
  std::vector<Load> out;
  for (int k = 0; k <= kmax; ++k) out.push_back(dp.root.at_most(k).first.value());
  return out;
}

// The literal root rule min_{1<=i<=k} L_i(e): the root treated as an ordinary
// diffusing node with an incoming arc. Reported for comparison only.
inline Cost root_as_diffuser_load(const DpTables& dp, int k) {
  const NodeTables& root = dp.tables.at(0);
  Cost best;
  for (int i = 1; i <= std::min(k, root.budget()); ++i) best = min_plus(best, root.l(i));
  return best;
}

}  // namespace dnmtp

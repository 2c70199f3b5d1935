#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "dnmtp/dp_solver.hpp"
#include "dnmtp/graph.hpp"
#include "dnmtp/load.hpp"
#include "dnmtp/tree.hpp"

namespace dnmtp {

struct ExperimentConfig {
  int n_nodes = 200;
  double alpha = 0.15;
  double beta = 0.2;
  int m = 2;
  std::uint64_t seed = 1;

  std::vector<int> dest_counts{2, 4, 8, 12, 16, 20, 24, 28, 32};
  std::vector<int> k_values{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  int sweep_k = 4;      // budget compared against k=0 in the destination sweep
  int fixed_dest = 20;  // destination count of the diffuser sweep

  double precision = 0.05;
  double confidence = 0.95;
  int min_samples = 30;
  int max_samples = 20000;

  int threads = 1;
  int topologies = 1;  // graphs averaged over; sample i uses graph i % topologies

  std::vector<int> critical_k{1, 2, 3, 4, 5, 6};
  int critical_r_min = 2;
  int critical_r_max = 60;
  std::vector<int> m_values{2, 3, 4, 5};

  void validate() const {
    if (!(precision > 0.0 && precision < 1.0)) throw Error("config: precision must lie in (0,1)");
    if (!(confidence > 0.5 && confidence < 1.0))
      throw Error("config: confidence must lie in (0.5,1)");
    if (min_samples < 2) throw Error("config: min_samples must be >= 2");
    if (max_samples < min_samples) throw Error("config: max_samples < min_samples");
    if (threads < 1) throw Error("config: threads must be >= 1");
    if (topologies < 1) throw Error("config: topologies must be >= 1");
    if (n_nodes < 2) throw Error("config: need at least two nodes");
    for (int k : k_values)
      if (k < 0) throw Error("config: negative k value");
    for (int k : critical_k)
      if (k < 0) throw Error("config: negative critical k value");
    if (sweep_k < 0) throw Error("config: negative sweep_k");
  }

  WaxmanParams waxman(int topology = 0) const {
    return {n_nodes, alpha, beta, m, seed + static_cast<std::uint64_t>(topology) * 1000003u, 1000.0};
  }
};

struct EstimateRow {
  TreeMethod builder = TreeMethod::kShortestPath;
  int r = 0;
  int k = 0;
  double mean_load = 0.0;
  double ci_half_width = 0.0;
  int n_samples = 0;
  bool hit_max = false;  // stopped at max_samples before reaching precision
  double reduction = 0.0;                                         // 1 - mean(k)/mean(0)
  double diff_pct = std::numeric_limits<double>::quiet_NaN();    // (ShP-StT)/StT*100

  friend bool operator==(const EstimateRow&, const EstimateRow&) = default;
};

inline std::vector<Graph> make_topologies(const ExperimentConfig& cfg) {
  std::vector<Graph> out;
  for (int i = 0; i < cfg.topologies; ++i) out.push_back(generate_waxman(cfg.waxman(i)));
  return out;
}

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix(splitmix(splitmix(seed) ^ stream) ^ index);
}

// Two-sided quantile: Student t below 30 samples, normal from there on.
inline double ci_quantile(double confidence, int n) {
  const double p = 1.0 - (1.0 - confidence) / 2.0;
  if (n < 30)
    return boost::math::quantile(boost::math::students_t_distribution<double>(n - 1), p);
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

struct Running {
  int n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / n;
    m2 += delta * (x - mean);
  }
  double half_width(double confidence) const {
    if (n < 2) return std::numeric_limits<double>::infinity();
    return ci_quantile(confidence, n) * std::sqrt(m2 / (n - 1)) / std::sqrt(static_cast<double>(n));
  }
};

}  // namespace detail

// Uniform source in V, then |R| destinations uniform without replacement in
// V minus the source.
inline MulticastRequest sample_request(const Graph& g, int n_dest, std::mt19937_64& rng) {
  if (n_dest < 1 || n_dest >= g.size())
    throw Error("sample_request: need 1 <= destinations < nodes");
  std::uniform_int_distribution<int> pick_src(0, g.size() - 1);
  MulticastRequest req;
  req.source = pick_src(rng);
  std::vector<NodeId> others;
  others.reserve(static_cast<std::size_t>(g.size() - 1));
  for (NodeId v = 0; v < g.size(); ++v)
    if (v != req.source) others.push_back(v);
  for (int i = 0; i < n_dest; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(others.size()) - 1);
    std::swap(others[i], others[pick(rng)]);
    req.destinations.insert(others[i]);
  }
  return req;
}

struct Variant {
  TreeMethod builder = TreeMethod::kShortestPath;
  int k = 0;
};

// Loads of every variant on one request. Also runs the per-sample structural
// checks; a failure there is a bug, reported as Error.
inline std::vector<Load> evaluate_sample(const Graph& g, const MulticastRequest& req,
                                         std::span<const Variant> variants) {
  std::vector<Load> out(variants.size(), 0);
  for (TreeMethod method : {TreeMethod::kShortestPath, TreeMethod::kSteiner}) {
    int kmax = -1;
    for (const auto& v : variants)
      if (v.builder == method) kmax = std::max(kmax, v.k);
    if (kmax < 0) continue;
    const IndexedTree tree(build_tree(g, req, method));
    const auto loads = solve_all_budgets(tree, kmax);
    const Load bare = load(tree, DiffuserSet{});
    if (loads[0] != bare) throw Error("harness: k=0 solve differs from the diffuser-free load");
    if (method == TreeMethod::kShortestPath) {
      const auto dist = hop_distances(g, req.source);
      Load expect = 0;
      for (NodeId r : req.destinations) expect += dist[r];
      if (bare != expect) throw Error("harness: ShP load differs from summed hop distances");
    } else if (bare < static_cast<Load>(tree.size() - 1)) {
      throw Error("harness: StT load below its arc count");
    }
    for (std::size_t i = 1; i < loads.size(); ++i)
      if (loads[i] > loads[i - 1]) throw Error("harness: load increased with budget");
    for (std::size_t i = 0; i < variants.size(); ++i)
      if (variants[i].builder == method) out[i] = loads[static_cast<std::size_t>(variants[i].k)];
  }
  return out;
}

// Paired estimation of several variants on a shared request stream. Samples
// are consumed in index order, so the result does not depend on the number of
// worker threads. Stops once every variant meets the precision target (and
// min_samples is reached) or at max_samples.
inline std::vector<EstimateRow> estimate_cell(std::span<const Graph> graphs, int n_dest,
                                              std::span<const Variant> variants,
                                              const ExperimentConfig& cfg,
                                              std::uint64_t stream) {
  cfg.validate();
  if (graphs.empty()) throw Error("harness: no topology");
  for (const auto& g : graphs)
    if (n_dest < 1 || n_dest >= g.size())
      throw Error("harness: destination count " + std::to_string(n_dest) +
                  " must be in [1, nodes)");

  std::vector<detail::Running> acc(variants.size());
  const int batch = std::max(16, cfg.threads * 8);
  std::vector<std::vector<Load>> results(static_cast<std::size_t>(batch));
  int consumed = 0;
  bool done = false;

  auto run_one = [&](int index) {
    std::mt19937_64 rng(detail::sample_seed(cfg.seed, stream, static_cast<std::uint64_t>(index)));
    const Graph& g = graphs[static_cast<std::size_t>(index) % graphs.size()];
    const auto req = sample_request(g, n_dest, rng);
    return evaluate_sample(g, req, variants);
  };

  while (!done) {
    const int begin = consumed;
    const int count = std::min(batch, cfg.max_samples - begin);
    if (cfg.threads == 1) {
      for (int i = 0; i < count; ++i) results[i] = run_one(begin + i);
    } else {
      std::atomic<int> next{0};
      std::exception_ptr failure;
      std::mutex failure_mu;
      std::vector<std::thread> pool;
      for (int w = 0; w < std::min(cfg.threads, count); ++w)
        pool.emplace_back([&] {
          for (int i = next++; i < count; i = next++) {
            try {
              results[i] = run_one(begin + i);
            } catch (...) {
              std::lock_guard lock(failure_mu);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      for (auto& th : pool) th.join();
      if (failure) std::rethrow_exception(failure);
    }
    for (int i = 0; i < count && !done; ++i) {
      for (std::size_t v = 0; v < variants.size(); ++v)
        acc[v].add(static_cast<double>(results[i][v]));
      ++consumed;
      if (consumed >= cfg.min_samples) {
        bool precise = true;
        for (const auto& a : acc)
          precise = precise && a.half_width(cfg.confidence) <= cfg.precision * a.mean;
        done = precise;
      }
      if (consumed >= cfg.max_samples) done = true;
    }
  }

  std::vector<EstimateRow> rows;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    EstimateRow row;
    row.builder = variants[v].builder;
    row.r = n_dest;
    row.k = variants[v].k;
    row.mean_load = acc[v].mean;
    row.ci_half_width = acc[v].half_width(cfg.confidence);
    row.n_samples = acc[v].n;
    row.hit_max = row.ci_half_width > cfg.precision * row.mean_load;
    rows.push_back(row);
  }
  return rows;
}

inline EstimateRow estimate_mean_load(const Graph& g, TreeMethod builder, int n_dest, int k,
                                      const ExperimentConfig& cfg) {
  if (n_dest >= g.size()) throw Error("harness: destination count must be below node count");
  const Variant v{builder, k};
  return estimate_cell(std::span<const Graph>(&g, 1), n_dest, std::span<const Variant>(&v, 1), cfg,
                       static_cast<std::uint64_t>(n_dest))
      .front();
}

namespace detail {

// Fills reduction (against the same builder's k=0 row) and diff_pct (ShP vs
// StT at the same r and k).
inline void annotate(std::vector<EstimateRow>& rows) {
  auto find = [&](TreeMethod b, int r, int k) -> const EstimateRow* {
    for (const auto& row : rows)
      if (row.builder == b && row.r == r && row.k == k) return &row;
    return nullptr;
  };
  for (auto& row : rows) {
    if (const auto* base = find(row.builder, row.r, 0))
      row.reduction = 1.0 - row.mean_load / base->mean_load;
    const auto* shp = find(TreeMethod::kShortestPath, row.r, row.k);
    const auto* stt = find(TreeMethod::kSteiner, row.r, row.k);
    if (shp && stt) row.diff_pct = (shp->mean_load - stt->mean_load) / stt->mean_load * 100.0;
  }
}

inline std::vector<Variant> both_builders(const std::vector<int>& ks) {
  std::vector<Variant> out;
  for (TreeMethod b : {TreeMethod::kShortestPath, TreeMethod::kSteiner})
    for (int k : ks) out.push_back({b, k});
  return out;
}

constexpr std::uint64_t kStreamDest = 1ULL << 32;
constexpr std::uint64_t kStreamK = 2ULL << 32;
constexpr std::uint64_t kStreamCritical = 3ULL << 32;

}  // namespace detail

// Both builders, each |R| in dest_counts, k in {0, sweep_k}.
inline std::vector<EstimateRow> sweep_destinations(std::span<const Graph> graphs,
                                                   const ExperimentConfig& cfg) {
  if (cfg.dest_counts.empty()) throw Error("sweep: no destination counts");
  const auto variants = detail::both_builders({0, cfg.sweep_k});
  std::vector<EstimateRow> rows;
  for (int r : cfg.dest_counts) {
    auto cell = estimate_cell(graphs, r, variants, cfg, detail::kStreamDest + static_cast<std::uint64_t>(r));
    rows.insert(rows.end(), cell.begin(), cell.end());
  }
  detail::annotate(rows);
  return rows;
}

// Both builders at a fixed |R|, k = 0 plus every k in k_values.
inline std::vector<EstimateRow> sweep_diffusers(std::span<const Graph> graphs,
                                                const ExperimentConfig& cfg, int n_dest) {
  if (cfg.k_values.empty()) throw Error("sweep: no k values");
  std::vector<int> ks{0};
  for (int k : cfg.k_values)
    if (k != 0) ks.push_back(k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  auto rows = estimate_cell(graphs, n_dest, detail::both_builders(ks), cfg,
                            detail::kStreamK + static_cast<std::uint64_t>(n_dest));
  detail::annotate(rows);
  return rows;
}

struct CriticalPoint {
  int k = 0;
  std::optional<int> r_star;
  friend bool operator==(const CriticalPoint&, const CriticalPoint&) = default;
};

struct CriticalStudy {
  std::vector<CriticalPoint> points;
  std::optional<double> slope;      // least squares of r_star on k
  std::optional<double> intercept;
  std::vector<EstimateRow> scan;    // every cell evaluated
};

inline std::optional<std::pair<double, double>> least_squares(const std::vector<double>& x,
                                                              const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  const double slope = sxy / sxx;
  return std::make_pair(slope, my - slope * mx);
}

// For each k in critical_k, the smallest |R| in [critical_r_min, critical_r_max]
// where mean ShP load drops below mean StT load. Scanning stops once every k
// has its crossing.
inline CriticalStudy find_critical_points(std::span<const Graph> graphs, const ExperimentConfig& cfg) {
  if (cfg.critical_k.empty()) throw Error("critical: no k values");
  int max_r = cfg.critical_r_max;
  for (const auto& g : graphs) max_r = std::min(max_r, g.size() - 1);
  if (cfg.critical_r_min < 1 || cfg.critical_r_min > max_r) throw Error("critical: empty |R| range");

  CriticalStudy study;
  for (int k : cfg.critical_k) study.points.push_back({k, std::nullopt});
  const auto variants = detail::both_builders(cfg.critical_k);
  for (int r = cfg.critical_r_min; r <= max_r; ++r) {
    auto cell = estimate_cell(graphs, r, variants, cfg,
                              detail::kStreamCritical + static_cast<std::uint64_t>(r));
    detail::annotate(cell);
    for (auto& p : study.points) {
      if (p.r_star) continue;
      double shp = 0.0;
      double stt = 0.0;
      for (const auto& row : cell)
        if (row.k == p.k) (row.builder == TreeMethod::kShortestPath ? shp : stt) = row.mean_load;
      if (shp < stt) p.r_star = r;
    }
    study.scan.insert(study.scan.end(), cell.begin(), cell.end());
    if (std::all_of(study.points.begin(), study.points.end(),
                    [](const CriticalPoint& p) { return p.r_star.has_value(); }))
      break;
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : study.points)
    if (p.r_star) {
      xs.push_back(p.k);
      ys.push_back(*p.r_star);
    }
  if (auto fit = least_squares(xs, ys)) {
    study.slope = fit->first;
    study.intercept = fit->second;
  }
  return study;
}

struct DegreeRow {
  int m = 0;
  double avg_degree = 0.0;
  std::optional<double> slope;
  std::vector<CriticalPoint> points;
};

// Critical-line slope for Waxman graphs built with each m, sorted by degree.
inline std::vector<DegreeRow> gradient_vs_degree(const ExperimentConfig& cfg,
                                                 const std::vector<int>& m_values) {
  std::vector<DegreeRow> rows;
  for (int m : m_values) {
    ExperimentConfig c = cfg;
    c.m = m;
    const auto graphs = make_topologies(c);
    double deg = 0.0;
    for (const auto& g : graphs) deg += average_degree(g).value();
    deg /= static_cast<double>(graphs.size());
    auto study = find_critical_points(graphs, c);
    rows.push_back({m, deg, study.slope, std::move(study.points)});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const DegreeRow& a, const DegreeRow& b) { return a.avg_degree < b.avg_degree; });
  return rows;
}

}  // namespace dnmtp

#pragma once

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dnmtp/dp_solver.hpp"
#include "dnmtp/experiment.hpp"
#include "dnmtp/io.hpp"
#include "dnmtp/load.hpp"
#include "dnmtp/tree.hpp"

namespace dnmtp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUsage = 2;

// Validation failure detected after argument parsing (exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw CLI::ValidationError(what, "\"" + item + "\" is not an integer");
    out.push_back(v);
  }
  return out;
}

// key=value lines; '#' and ';' start comments. Keys are long option names.
// Returned as "--key=value" arguments, in file order.
inline std::vector<std::string> read_config(const std::string& path,
                                            const std::vector<std::string>& known) {
  std::istringstream in(io::read_file(path));
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == ';') continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw io::FormatError(where, "expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw io::FormatError(where, "unknown key \"" + key + "\"");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

inline std::string env_seed_default() {
  const char* s = std::getenv("DNMTP_SEED");
  return s ? s : "0";
}

inline std::uint64_t parse_seed(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || s[0] == '-')
    throw CLI::ValidationError("--seed", "\"" + s + "\" is not a non-negative integer");
  return v;
}

inline void emit(std::ostream& out, const std::string& path, const std::string& content) {
  if (path.empty())
    out << content;
  else
    io::write_atomic(path, content);
}

}  // namespace detail

// Entry point behind the dnmtp executable; args exclude the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusing-node placement in optical multicast trees", "dnmtp"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  // gen-graph
  auto* gen = app.add_subcommand("gen-graph", "Generate a Waxman topology");
  WaxmanParams wax;
  std::string gen_seed;
  std::string gen_out;
  bool gen_json = false;
  gen->add_option("--nodes", wax.n, "Node count")->capture_default_str();
  gen->add_option("--alpha", wax.alpha, "Waxman alpha")->capture_default_str();
  gen->add_option("--beta", wax.beta, "Waxman beta")->capture_default_str();
  gen->add_option("--m", wax.m, "Links per new node")->capture_default_str();
  gen->add_option("--seed", gen_seed, "RNG seed (default: $DNMTP_SEED or 0)");
  gen->add_option("--out", gen_out, "Output graph JSON");
  gen->add_flag("--json", gen_json, "Print graph JSON to stdout");

  // build-tree
  auto* build = app.add_subcommand("build-tree", "Build a multicast tree");
  std::string bt_graph;
  std::string bt_method = "shp";
  std::optional<int> bt_source;
  std::string bt_dest;
  std::optional<int> bt_ndest;
  std::string bt_seed;
  std::string bt_out;
  bool bt_json = false;
  build->add_option("--graph", bt_graph, "Graph JSON")->required();
  build->add_option("--method", bt_method, "shp or stt")
      ->check(CLI::IsMember({"shp", "stt"}))
      ->capture_default_str();
  build->add_option("--source", bt_source, "Source node (sampled when omitted with --ndest)");
  auto* dest_opt = build->add_option("--dest", bt_dest, "Destinations, comma separated");
  auto* ndest_opt = build->add_option("--ndest", bt_ndest, "Number of random destinations")
                        ->check(CLI::PositiveNumber);
  dest_opt->excludes(ndest_opt);
  build->add_option("--seed", bt_seed, "RNG seed for --ndest");
  build->add_option("--out", bt_out, "Output tree JSON");
  build->add_flag("--json", bt_json, "Print tree JSON to stdout");

  // solve
  auto* solve = app.add_subcommand("solve", "Place at most k diffusing nodes optimally");
  std::string sv_tree;
  int sv_k = 0;
  bool sv_oracle = false;
  bool sv_root_diffuser = false;
  std::string sv_tables;
  std::string sv_out;
  solve->add_option("--tree", sv_tree, "Tree JSON")->required();
  solve->add_option("--k", sv_k, "Diffuser budget")->required()->check(CLI::NonNegativeNumber);
  solve->add_flag("--oracle", sv_oracle, "Cross-check against exhaustive search");
  solve->add_flag("--root-as-diffuser", sv_root_diffuser,
                  "Also report min_{1<=i<=k} L_i(root) (root charged as a diffuser)");
  solve->add_option("--tables", sv_tables, "Dump DP tables as CSV");
  solve->add_option("--out", sv_out, "Write placement JSON here instead of stdout");

  // eval
  auto* eval = app.add_subcommand("eval", "Load of a tree under a given diffuser set");
  std::string ev_tree;
  std::string ev_diff;
  bool ev_paths = false;
  bool ev_json = false;
  std::string ev_out;
  eval->add_option("--tree", ev_tree, "Tree JSON")->required();
  eval->add_option("--diffusers", ev_diff, "Diffusing nodes, comma separated");
  eval->add_flag("--paths", ev_paths, "List the solution paths");
  eval->add_flag("--json", ev_json, "Print JSON to stdout");
  eval->add_option("--out", ev_out, "Write JSON here");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Statistical experiments");
  exp->require_subcommand(1);
  ExperimentConfig cfg;
  std::string ex_seed;
  std::string ex_config;
  std::string ex_graph;
  std::string ex_out;
  std::string ex_scan_out;
  std::string ex_dest_counts;
  std::string ex_k_values;
  std::string ex_critical_k;
  std::string ex_m_values;
  std::vector<std::string> known_keys;
  auto common = [&](CLI::App* sub) {
    auto opt = [&](const std::string& name, auto& var, const std::string& help) {
      known_keys.push_back(name);
      return sub->add_option("--" + name, var, help);
    };
    opt("nodes", cfg.n_nodes, "Graph node count");
    opt("alpha", cfg.alpha, "Waxman alpha");
    opt("beta", cfg.beta, "Waxman beta");
    opt("m", cfg.m, "Waxman links per new node");
    opt("seed", ex_seed, "RNG seed (default: $DNMTP_SEED or 0)");
    opt("precision", cfg.precision, "Relative CI half-width target");
    opt("confidence", cfg.confidence, "CI confidence level");
    opt("min-samples", cfg.min_samples, "Minimum samples per cell");
    opt("max-samples", cfg.max_samples, "Maximum samples per cell");
    opt("threads", cfg.threads, "Worker threads");
    opt("topologies", cfg.topologies, "Number of topologies to average over");
    opt("dest-counts", ex_dest_counts, "Destination counts, comma separated");
    opt("k-values", ex_k_values, "Budgets, comma separated");
    opt("sweep-k", cfg.sweep_k, "Budget of the destination sweep");
    opt("fixed-dest", cfg.fixed_dest, "Destination count of the budget sweep");
    opt("critical-k", ex_critical_k, "Budgets scanned for critical points");
    opt("r-min", cfg.critical_r_min, "Smallest |R| scanned");
    opt("r-max", cfg.critical_r_max, "Largest |R| scanned");
    opt("m-values", ex_m_values, "Waxman m values for the degree study");
    sub->add_option("--config", ex_config, "key=value file; flags override it");
    sub->add_option("--graph", ex_graph, "Use this graph instead of generating one");
    sub->add_option("--out", ex_out, "Output CSV");
    sub->add_option("--scan-out", ex_scan_out, "Critical scan rows as CSV");
  };
  auto* ex_dest = exp->add_subcommand("sweep-dest", "Load vs destination count");
  auto* ex_k = exp->add_subcommand("sweep-k", "Load vs diffuser budget");
  auto* ex_crit = exp->add_subcommand("critical", "ShP/StT critical points");
  auto* ex_deg = exp->add_subcommand("degree", "Critical slope vs average degree");
  for (auto* sub : {ex_dest, ex_k, ex_crit, ex_deg}) common(sub);
  std::sort(known_keys.begin(), known_keys.end());
  known_keys.erase(std::unique(known_keys.begin(), known_keys.end()), known_keys.end());

  try {
    // Config values go first so that explicit flags (TakeLast) win.
    std::vector<std::string> argv = args;
    if (argv.size() >= 2 && argv[0] == "experiment") {
      for (std::size_t i = 2; i < argv.size(); ++i) {
        std::string path;
        if (argv[i] == "--config" && i + 1 < argv.size())
          path = argv[i + 1];
        else if (argv[i].rfind("--config=", 0) == 0)
          path = argv[i].substr(9);
        if (path.empty()) continue;
        auto extra = detail::read_config(path, known_keys);
        argv.insert(argv.begin() + 2, extra.begin(), extra.end());
        break;
      }
    }
    std::reverse(argv.begin(), argv.end());
    try {
      app.parse(argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }

    if (gen->parsed()) {
      wax.seed = detail::parse_seed(gen_seed.empty() ? detail::env_seed_default() : gen_seed);
      const Graph g = generate_waxman(wax);
      const std::string text = io::graph_to_json(g).dump() + "\n";
      if (!gen_out.empty()) io::write_atomic(gen_out, text);
      if (gen_json)
        out << text;
      else
        out << "graph: " << g.size() << " nodes, " << g.edge_count() << " edges, average degree "
            << io::format_number(average_degree(g).value()) << '\n';
      return kExitOk;
    }

    if (build->parsed()) {
      const Graph g = io::load_graph(bt_graph);
      MulticastRequest req;
      if (!bt_dest.empty()) {
        if (!bt_source) throw CLI::RequiredError("--source");
        req.source = *bt_source;
        for (int v : detail::parse_int_list(bt_dest, "--dest"))
          if (!req.destinations.insert(v).second)
            throw ValidationError("--dest: duplicate destination " + std::to_string(v));
      } else if (bt_ndest) {
        std::mt19937_64 rng(detail::parse_seed(bt_seed.empty() ? detail::env_seed_default() : bt_seed));
        if (*bt_ndest >= g.size()) throw ValidationError("--ndest must be below the node count");
        if (bt_source) {
          if (!g.valid(*bt_source)) throw ValidationError("--source is not a graph node");
          std::vector<NodeId> others;
          for (NodeId v = 0; v < g.size(); ++v)
            if (v != *bt_source) others.push_back(v);
          std::shuffle(others.begin(), others.end(), rng);
          req.source = *bt_source;
          req.destinations.insert(others.begin(), others.begin() + *bt_ndest);
        } else {
          req = sample_request(g, *bt_ndest, rng);
        }
      } else {
        throw CLI::RequiredError("--dest or --ndest");
      }
      try {
        check_request(g, req);
      } catch (const Error& e) {
        throw ValidationError(e.what());
      }
      const RootedTree t = build_tree(g, req, bt_method == "shp" ? TreeMethod::kShortestPath
                                                                 : TreeMethod::kSteiner);
      if (auto v = validate_tree(t, req, &g)) throw ValidationError("tree invalid: " + v->kind);
      const std::string text = io::tree_to_json(t).dump() + "\n";
      if (!bt_out.empty()) io::write_atomic(bt_out, text);
      if (bt_json)
        out << text;
      else
        out << "tree (" << bt_method << "): root " << t.root << ", " << t.arc_count() << " arcs, "
            << t.destinations.size() << " destinations, load without diffusers "
            << load(t, {}) << '\n';
      return kExitOk;
    }

    if (solve->parsed()) {
      const RootedTree rt = io::load_tree(sv_tree);
      const IndexedTree t(rt);
      SolveOptions opt;
      opt.keep_tables = !sv_tables.empty() || sv_root_diffuser;
      const Placement p = solve_dnmtp(t, sv_k, opt);
      if (load(t, p.diffusers) != p.load)
        throw ValidationError("extracted placement does not reproduce the solver load");
      nlohmann::json j = io::placement_to_json(p);
      if (sv_root_diffuser) {
        const Cost c = root_as_diffuser_load(*p.tables, sv_k);
        j["root_as_diffuser_load"] = c.feasible() ? nlohmann::json(c.value()) : nlohmann::json(nullptr);
      }
      if (sv_oracle) {
        if (t.size() > kOracleMaxNodes) {
          err << "oracle skipped: tree has " << t.size() << " nodes (limit " << kOracleMaxNodes
              << ")\n";
        } else {
          const auto o = brute_force_optimal(t, sv_k);
          j["oracle_load"] = o.load;
          if (o.load != p.load)
            throw ValidationError("oracle mismatch: solver " + std::to_string(p.load) +
                                  ", exhaustive " + std::to_string(o.load));
        }
      }
      if (!sv_tables.empty()) io::write_atomic(sv_tables, io::tables_csv(t, *p.tables));
      if (!sv_out.empty()) {
        io::write_atomic(sv_out, j.dump() + "\n");
        out << "placement: k=" << p.k << ", load " << p.load << ", " << p.diffusers.size()
            << " diffusers\n";
      } else {
        out << j.dump() << '\n';
      }
      return kExitOk;
    }

    if (eval->parsed()) {
      const IndexedTree t(io::load_tree(ev_tree));
      DiffuserSet d;
      for (int v : detail::parse_int_list(ev_diff, "--diffusers")) d.insert(v);
      Load l = 0;
      PathSolution sol;
      try {
        l = load(t, d);
        sol = materialize_paths(t, d);
      } catch (const Error& e) {
        throw ValidationError(e.what());
      }
      if (auto bad = check_path_solution(t, d, sol)) throw ValidationError("path audit: " + *bad);
      if (sol.total_length() != l) throw ValidationError("path lengths disagree with load");
      nlohmann::json j{{"load", l},
                       {"diffusers", std::vector<NodeId>(d.begin(), d.end())},
                       {"arcs", t.size() - 1}};
      if (ev_paths) j["paths"] = sol.paths;
      if (!ev_out.empty()) io::write_atomic(ev_out, j.dump() + "\n");
      if (ev_json) {
        out << j.dump() << '\n';
      } else {
        out << "load " << l << " over " << t.size() - 1 << " arcs with " << d.size()
            << " diffusers\n";
        if (ev_paths)
          for (const auto& p : sol.paths) {
            for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " -> " : "  ") << p[i];
            out << '\n';
          }
      }
      return kExitOk;
    }

    if (exp->parsed()) {
      cfg.seed = detail::parse_seed(ex_seed.empty() ? detail::env_seed_default() : ex_seed);
      if (!ex_dest_counts.empty()) cfg.dest_counts = detail::parse_int_list(ex_dest_counts, "--dest-counts");
      if (!ex_k_values.empty()) cfg.k_values = detail::parse_int_list(ex_k_values, "--k-values");
      if (!ex_critical_k.empty()) cfg.critical_k = detail::parse_int_list(ex_critical_k, "--critical-k");
      if (!ex_m_values.empty()) cfg.m_values = detail::parse_int_list(ex_m_values, "--m-values");
      try {
        cfg.validate();
      } catch (const Error& e) {
        throw ValidationError(e.what());
      }
      std::vector<Graph> graphs;
      if (!ex_graph.empty())
        graphs.push_back(io::load_graph(ex_graph));
      else if (!ex_deg->parsed())
        graphs = make_topologies(cfg);

      auto warn_max = [&](const std::vector<EstimateRow>& rows) {
        for (const auto& r : rows)
          if (r.hit_max)
            err << "warning: " << method_name(r.builder) << " r=" << r.r << " k=" << r.k
                << " stopped at max-samples before reaching the precision target\n";
      };
      if (ex_dest->parsed()) {
        const auto rows = sweep_destinations(graphs, cfg);
        warn_max(rows);
        detail::emit(out, ex_out, io::estimates_csv(rows));
      } else if (ex_k->parsed()) {
        const auto rows = sweep_diffusers(graphs, cfg, cfg.fixed_dest);
        warn_max(rows);
        detail::emit(out, ex_out, io::estimates_csv(rows));
      } else if (ex_crit->parsed()) {
        const auto study = find_critical_points(graphs, cfg);
        warn_max(study.scan);
        if (!ex_scan_out.empty()) io::write_atomic(ex_scan_out, io::estimates_csv(study.scan));
        detail::emit(out, ex_out, io::critical_csv(study));
        if (!ex_out.empty()) {
          out << "critical points:";
          for (const auto& p : study.points)
            out << " (" << p.k << "," << (p.r_star ? std::to_string(*p.r_star) : "-") << ")";
          out << "\nslope " << (study.slope ? io::format_number(*study.slope) : "n/a") << '\n';
        }
      } else if (ex_deg->parsed()) {
        if (!ex_graph.empty()) throw ValidationError("degree study generates its own graphs");
        const auto rows = gradient_vs_degree(cfg, cfg.m_values);
        detail::emit(out, ex_out, io::degree_csv(rows));
      }
      return kExitOk;
    }
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitUsage;
}

}  // namespace dnmtp::cli

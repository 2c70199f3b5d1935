#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "dnmtp/dp_solver.hpp"
#include "dnmtp/experiment.hpp"
#include "dnmtp/graph.hpp"
#include "dnmtp/tree.hpp"

namespace dnmtp::io {

using json = nlohmann::json;

// Malformed input. `where` is "file:line" for syntax errors or a JSON
// pointer for structural ones.
class FormatError : public Error {
 public:
  FormatError(const std::string& where, const std::string& what)
      : Error(where + ": " + what) {}
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path, "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Write to a temporary sibling, then rename over the target.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename into " + path + ": " + ec.message());
  }
}

inline json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    for (std::size_t i = 0; i + 1 < upto; ++i)
      if (text[i] == '\n') ++line;
    throw FormatError(source + ":" + std::to_string(line), "invalid JSON");
  }
}

namespace detail {

inline const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where, std::string("missing field \"") + key + "\"");
  return *it;
}

inline int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw FormatError(where, "expected an integer");
  const auto x = v.get<long long>();
  if (x < -1000000000LL || x > 1000000000LL) throw FormatError(where, "integer out of range");
  return static_cast<int>(x);
}

inline double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw FormatError(where, "expected a number");
  return v.get<double>();
}

inline int parse_id(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw FormatError(where, "key \"" + s + "\" is not a node id");
  }
  if (used != s.size()) throw FormatError(where, "key \"" + s + "\" is not a node id");
  return v;
}

}  // namespace detail

// {"n": int, "coords": [[x,y],...], "edges": [[u,v],...]}, each edge once with u<v.
inline json graph_to_json(const Graph& g) {
  json coords = json::array();
  for (const auto& p : g.coords()) coords.push_back({p.x, p.y});
  json edges = json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
  return {{"n", g.size()}, {"coords", std::move(coords)}, {"edges", std::move(edges)}};
}

inline Graph graph_from_json(const json& j) {
  using detail::as_int;
  const int n = as_int(detail::field(j, "n", "/"), "/n");
  if (n < 1) throw FormatError("/n", "node count must be positive");
  const json& jc = detail::field(j, "coords", "/");
  if (!jc.is_array() || static_cast<int>(jc.size()) != n)
    throw FormatError("/coords", "expected an array of n points");
  std::vector<Point> coords;
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string w = "/coords/" + std::to_string(i);
    if (!jc[i].is_array() || jc[i].size() != 2) throw FormatError(w, "expected [x, y]");
    coords.push_back({detail::as_number(jc[i][0], w + "/0"), detail::as_number(jc[i][1], w + "/1")});
  }
  const json& je = detail::field(j, "edges", "/");
  if (!je.is_array()) throw FormatError("/edges", "expected an array");
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string w = "/edges/" + std::to_string(i);
    if (!je[i].is_array() || je[i].size() != 2) throw FormatError(w, "expected [u, v]");
    const int u = as_int(je[i][0], w + "/0");
    const int v = as_int(je[i][1], w + "/1");
    if (u < 0 || v >= n) throw FormatError(w, "node id out of range");
    if (u >= v) throw FormatError(w, "edge must be listed once with u < v");
    if (!seen.emplace(u, v).second) throw FormatError(w, "duplicate edge");
    edges.emplace_back(u, v);
  }
  Graph g = Graph::from_edges(n, std::move(coords), edges);
  if (!g.is_connected()) throw FormatError("/edges", "graph is not connected");
  return g;
}

// {"root": int, "parent": {"node": parent, ...}, "destinations": [ids]}
inline json tree_to_json(const RootedTree& t) {
  json parent = json::object();
  for (const auto& [v, p] : t.parent) parent[std::to_string(v)] = p;
  return {{"root", t.root},
          {"parent", std::move(parent)},
          {"destinations", std::vector<NodeId>(t.destinations.begin(), t.destinations.end())}};
}

inline RootedTree tree_from_json(const json& j) {
  RootedTree t;
  t.root = detail::as_int(detail::field(j, "root", "/"), "/root");
  const json& jp = detail::field(j, "parent", "/");
  if (!jp.is_object()) throw FormatError("/parent", "expected an object");
  for (auto it = jp.begin(); it != jp.end(); ++it) {
    const std::string w = "/parent/" + it.key();
    const int v = detail::parse_id(it.key(), w);
    t.parent.emplace(v, detail::as_int(it.value(), w));
  }
  const json& jd = detail::field(j, "destinations", "/");
  if (!jd.is_array()) throw FormatError("/destinations", "expected an array");
  for (std::size_t i = 0; i < jd.size(); ++i) {
    const std::string w = "/destinations/" + std::to_string(i);
    if (!t.destinations.insert(detail::as_int(jd[i], w)).second)
      throw FormatError(w, "duplicate destination");
  }
  try {
    IndexedTree check(t);
  } catch (const Error& e) {
    throw FormatError("/", e.what());
  }
  return t;
}

inline json placement_to_json(const Placement& p) {
  return {{"k", p.k},
          {"load", p.load},
          {"diffusers", std::vector<NodeId>(p.diffusers.begin(), p.diffusers.end())}};
}

inline Graph load_graph(const std::string& path) {
  try {
    return graph_from_json(parse_json(read_file(path), path));
  } catch (const FormatError& e) {
    if (std::string(e.what()).rfind(path, 0) == 0) throw;
    throw FormatError(path, e.what());
  }
}

inline RootedTree load_tree(const std::string& path) {
  try {
    return tree_from_json(parse_json(read_file(path), path));
  } catch (const FormatError& e) {
    if (std::string(e.what()).rfind(path, 0) == 0) throw;
    throw FormatError(path, e.what());
  }
}

// node,kind,row,col,value: one line per table cell; value "inf" when
// infeasible. Rows are path numbers, cols diffuser counts (L uses row 1).
inline std::string tables_csv(const IndexedTree& t, const DpTables& dp) {
  std::ostringstream os;
  os << "node,kind,row,col,value\n";
  auto cell = [&](Cost c) { return c.feasible() ? std::to_string(c.value()) : std::string("inf"); };
  for (int u = 0; u < t.size(); ++u) {
    const NodeTables& nt = dp.tables[u];
    for (int b = 1; b <= nt.rows(); ++b)
      for (int d = 0; d <= nt.budget(); ++d)
        os << t.id(u) << ",M," << b << ',' << d << ',' << cell(nt.m(b, d)) << '\n';
    for (int d = 1; d <= nt.budget(); ++d)
      os << t.id(u) << ",L,1," << d << ',' << cell(nt.l(d)) << '\n';
  }
  return os.str();
}

inline std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline constexpr const char* kEstimateHeader =
    "builder,r,k,mean_load,ci_half,n_samples,reduction,diff_pct";

inline std::string estimates_csv(const std::vector<EstimateRow>& rows) {
  std::ostringstream os;
  os << kEstimateHeader << '\n';
  for (const auto& r : rows)
    os << method_name(r.builder) << ',' << r.r << ',' << r.k << ',' << format_number(r.mean_load)
       << ',' << format_number(r.ci_half_width) << ',' << r.n_samples << ','
       << format_number(r.reduction) << ',' << format_number(r.diff_pct) << '\n';
  return os.str();
}

inline std::string critical_csv(const CriticalStudy& s) {
  std::ostringstream os;
  os << "k,r_star\n";
  for (const auto& p : s.points) os << p.k << ',' << (p.r_star ? std::to_string(*p.r_star) : "") << '\n';
  return os.str();
}

inline std::string degree_csv(const std::vector<DegreeRow>& rows) {
  std::ostringstream os;
  os << "m,avg_degree,slope\n";
  for (const auto& r : rows)
    os << r.m << ',' << format_number(r.avg_degree) << ','
       << (r.slope ? format_number(*r.slope) : "") << '\n';
  return os.str();
}

}  // namespace dnmtp::io

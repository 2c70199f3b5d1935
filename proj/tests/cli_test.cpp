#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dnmtp/cli.hpp"
#include "support.hpp"

namespace dnmtp {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) { return io::read_file(p.string()); }

void spit(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dnmtp_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, PipelineMatchesInProcessSolve) {
  ASSERT_EQ(run({"gen-graph", "--nodes", "80", "--seed", "4", "--out", path("g.json")}).code, 0);
  const Graph g = io::load_graph(path("g.json"));
  EXPECT_TRUE(g == generate_waxman(80, 0.15, 0.2, 2, 4));

  const auto bt = run({"build-tree", "--graph", path("g.json"), "--method", "stt", "--ndest", "12",
                       "--seed", "2", "--out", path("t.json")});
  ASSERT_EQ(bt.code, 0) << bt.err;
  const RootedTree t = io::load_tree(path("t.json"));
  EXPECT_EQ(t.destinations.size(), 12u);

  const auto sv = run({"solve", "--tree", path("t.json"), "--k", "3"});
  ASSERT_EQ(sv.code, 0) << sv.err;
  const auto j = nlohmann::json::parse(sv.out);
  const auto p = solve_dnmtp(t, 3);
  EXPECT_EQ(j.at("load").get<Load>(), p.load);
  EXPECT_EQ(j.at("k").get<int>(), 3);
  EXPECT_EQ(j.at("diffusers").get<std::vector<NodeId>>(),
            std::vector<NodeId>(p.diffusers.begin(), p.diffusers.end()));

  std::string dlist;
  for (NodeId v : p.diffusers) dlist += (dlist.empty() ? "" : ",") + std::to_string(v);
  const auto ev = run({"eval", "--tree", path("t.json"), "--diffusers", dlist, "--json"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_EQ(nlohmann::json::parse(ev.out).at("load").get<Load>(), p.load);
}

TEST_F(CliTest, OracleOnHandTree) {
  spit(path("t1.json"), io::tree_to_json(testing::tree_t1()).dump());
  const auto r = run({"solve", "--tree", path("t1.json"), "--k", "1", "--oracle"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("load"), 5);
  EXPECT_EQ(j.at("oracle_load"), 5);
}

TEST_F(CliTest, RootAsDiffuserAndTables) {
  spit(path("t1.json"), io::tree_to_json(testing::tree_t1()).dump());
  const auto r = run({"solve", "--tree", path("t1.json"), "--k", "1", "--root-as-diffuser",
                      "--tables", path("tables.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("root_as_diffuser_load"), 7);
  const std::string csv = slurp(path("tables.csv"));
  EXPECT_EQ(csv.rfind("node,kind,row,col,value\n", 0), 0u);
  EXPECT_NE(csv.find("inf"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  spit(path("t1.json"), io::tree_to_json(testing::tree_t1()).dump());
  EXPECT_EQ(run({"solve", "--tree", path("t1.json"), "--k", "-1"}).code, 2);
  EXPECT_EQ(run({"solve", "--tree", path("t1.json"), "--k", "1", "--bogus"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"build-tree", "--graph", path("x"), "--dest", "1", "--ndest", "2"}).code, 2);
}

TEST_F(CliTest, MalformedJsonReportsLocation) {
  spit(path("bad.json"), "{\n  \"root\": 0,\n  \"parent\": {\n}}}\n");
  const auto r = run({"solve", "--tree", path("bad.json"), "--k", "1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(path("bad.json") + ":4"), std::string::npos) << r.err;

  spit(path("leafy.json"), R"({"root":0,"parent":{"1":0,"2":1},"destinations":[1]})");
  const auto leafy = run({"solve", "--tree", path("leafy.json"), "--k", "1"});
  EXPECT_EQ(leafy.code, 1);
  EXPECT_NE(leafy.err.find("leafy.json"), std::string::npos);

  EXPECT_EQ(run({"solve", "--tree", path("missing.json"), "--k", "1"}).code, 1);
}

TEST_F(CliTest, EvalRejectsRootDiffuser) {
  spit(path("t1.json"), io::tree_to_json(testing::tree_t1()).dump());
  EXPECT_EQ(run({"eval", "--tree", path("t1.json"), "--diffusers", "0"}).code, 1);
  const auto ok = run({"eval", "--tree", path("t1.json"), "--diffusers", "1", "--paths"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_NE(ok.out.find("load 5"), std::string::npos);
}

TEST_F(CliTest, BuildTreeExplicitDestinations) {
  spit(path("g.json"), io::graph_to_json(testing::graph_cycle(6)).dump());
  const auto r = run({"build-tree", "--graph", path("g.json"), "--method", "shp", "--source", "0",
                      "--dest", "2,3", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const RootedTree t = io::tree_from_json(nlohmann::json::parse(r.out));
  EXPECT_EQ(t.destinations, (std::set<NodeId>{2, 3}));
  EXPECT_EQ(run({"build-tree", "--graph", path("g.json"), "--source", "0", "--dest", "0"}).code, 1);
  EXPECT_EQ(run({"build-tree", "--graph", path("g.json"), "--source", "0", "--dest", "2,2"}).code, 1);
}

TEST_F(CliTest, ConfigFileOverriddenByFlags) {
  spit(path("exp.cfg"),
       "# small run\nnodes = 50\nprecision = 0.3\nmin-samples = 10\nmax-samples = 40\n"
       "dest-counts = 4\nsweep-k = 2\n");
  const auto from_file = run({"experiment", "sweep-dest", "--config", path("exp.cfg"), "--seed", "3"});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(from_file.out.rfind(io::kEstimateHeader, 0), 0u);
  EXPECT_NE(from_file.out.find(",4,2,"), std::string::npos);

  const auto flagged = run({"experiment", "sweep-dest", "--config", path("exp.cfg"), "--seed", "3",
                            "--sweep-k", "1"});
  ASSERT_EQ(flagged.code, 0) << flagged.err;
  EXPECT_NE(flagged.out.find(",4,1,"), std::string::npos);
  EXPECT_EQ(flagged.out.find(",4,2,"), std::string::npos);

  spit(path("bad.cfg"), "nodes = 50\nfrobs = 1\n");
  const auto bad = run({"experiment", "sweep-dest", "--config", path("bad.cfg")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find(path("bad.cfg") + ":2"), std::string::npos) << bad.err;
}

TEST_F(CliTest, SeedDefaultsFromEnvironment) {
  ::setenv("DNMTP_SEED", "17", 1);
  const auto a = run({"gen-graph", "--nodes", "40", "--json"});
  ::unsetenv("DNMTP_SEED");
  const auto b = run({"gen-graph", "--nodes", "40", "--seed", "17", "--json"});
  const auto c = run({"gen-graph", "--nodes", "40", "--json"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
  EXPECT_EQ(run({"gen-graph", "--seed", "-3"}).code, 2);
}

TEST_F(CliTest, ExperimentOutputStableAcrossThreads) {
  const std::vector<std::string> base{"experiment", "sweep-k", "--nodes", "50", "--seed", "5",
                                      "--fixed-dest", "8", "--k-values", "1,2",
                                      "--min-samples", "10", "--precision", "0.3"};
  auto one = base;
  one.insert(one.end(), {"--threads", "1", "--out", path("a.csv")});
  auto many = base;
  many.insert(many.end(), {"--threads", "8", "--out", path("b.csv")});
  ASSERT_EQ(run(one).code, 0);
  ASSERT_EQ(run(many).code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

}  // namespace
}  // namespace dnmtp

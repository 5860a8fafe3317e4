#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "reconf/commands.hpp"
#include "reconf/io.hpp"
#include "test_util.hpp"

using namespace reconf;
using reconf::testing::makeCluster;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("reconf_io_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ScenarioConfig smallScenario() {
  ScenarioConfig c;
  c.nodes = 4;
  c.keyGroupsPerOperator = 8;
  c.operators = 3;
  c.totalTicks = 5;
  c.variesSchedule = {{0, 20.0}};
  c.jitterRange = 2.0;
  c.optimizer.milp.budget = MigrationBudget::count(4);
  c.seed = 5;
  return c;
}

void writeJson(const fs::path& p, const Json& j) { writeFileAtomic(p.string(), j.dump(2)); }

}  // namespace

TEST(Snapshot, RoundTripsExactly) {
  auto c = makeCluster({{1.1, 2.0 / 3.0}, {}, {7}}, {2}, 3.25);
  c.node(NodeId{1}).capacityWeight = 0.75;
  c.stats.at(KeyGroupId{1}).op = OperatorId{4};
  TrafficMatrix t;
  t.rates[{KeyGroupId{0}, KeyGroupId{1}}] = 0.1;
  t.downstream[OperatorId{0}] = {OperatorId{4}};
  const Json doc = Json::parse(snapshotToJson(c, &t).dump());
  const ClusterState back = clusterFromJson(doc);
  EXPECT_EQ(back.allocation, c.allocation);
  ASSERT_EQ(back.nodes.size(), c.nodes.size());
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    EXPECT_EQ(back.nodes[i].id, c.nodes[i].id);
    EXPECT_EQ(back.nodes[i].capacityWeight, c.nodes[i].capacityWeight);
    EXPECT_EQ(back.nodes[i].kill, c.nodes[i].kill);
  }
  for (const auto& [g, s] : c.stats) {
    const auto& b = back.stats.at(g);
    EXPECT_EQ(b.op, s.op);
    EXPECT_EQ(b.load, s.load);
    EXPECT_EQ(b.stateSize, s.stateSize);
    EXPECT_EQ(b.migrCost, s.migrCost);
  }
  const TrafficMatrix tb = trafficFromJson(doc["traffic"]);
  EXPECT_EQ(tb.rates, t.rates);
  EXPECT_EQ(tb.downstream, t.downstream);
  EXPECT_EQ(snapshotToJson(back, &tb).dump(), doc.dump());
}

TEST(Snapshot, ValidationNamesOffendingKeys) {
  Json doc = toJson(makeCluster({{1}}));
  doc["key_groups"][0].erase("load");
  doc["colour"] = "blue";
  try {
    clusterFromJson(doc);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.keys(), (std::vector<std::string>{"colour", "key_groups[0].load"}));
  }
}

TEST(Scenario, RoundTripsAndRejectsBadKeys) {
  const ScenarioConfig c = smallScenario();
  const ScenarioConfig back = scenarioFromJson(toJson(c));
  EXPECT_EQ(toJson(back).dump(), toJson(c).dump());

  Json doc = toJson(c);
  doc.erase("nodes");
  doc["optimizer"]["kind"] = "magic";
  doc["optimizer"]["speed"] = 3;
  try {
    scenarioFromJson(doc);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.keys(), (std::vector<std::string>{"nodes", "optimizer.kind", "optimizer.speed"}));
    EXPECT_NE(std::string(e.what()).find("nodes"), std::string::npos);
  }
  doc = toJson(c);
  doc["schema_version"] = 2;
  EXPECT_THROW(scenarioFromJson(doc), ValidationError);
}

TEST(Graph, RoundTrip) {
  WeightedGraph g;
  g.addVertex(KeyGroupId{0}, 1.5);
  g.addVertex(KeyGroupId{3}, 2.0);
  g.addEdge(KeyGroupId{3}, KeyGroupId{0}, 4.0);
  const auto back = graphFromJson(toJson(g));
  EXPECT_EQ(back.vertices, g.vertices);
  EXPECT_EQ(back.edges, g.edges);
}

TEST(Tape, CsvRoundTrip) {
  const auto gen = generateScenario(smallScenario());
  ASSERT_FALSE(gen.tape.events.empty());
  const std::string text = tapeCsv(gen.tape);
  EXPECT_EQ(text.substr(0, text.find('\n')), "tick,target,delta");
  EXPECT_EQ(parseTapeCsv(text).events, gen.tape.events);
  EXPECT_THROW(parseTapeCsv("tick,target,delta\n1,x3,2\n"), Error);
  EXPECT_THROW(parseTapeCsv("tick,target,delta\n2,n1,1\n1,n1,1\n"), Error);
}

TEST(Metrics, CsvHasFixedColumns) {
  MetricsSeries s;
  s.optimizer = "milp";
  MetricsSample m;
  m.tick = 3;
  m.loadDistance = 1.0 / 3.0;
  m.migrations = 2;
  m.migrationLatency = 2.5;
  m.activeNodes = 4;
  s.samples.push_back(m);
  EXPECT_EQ(metricsCsv(s),
            "tick,optimizer,load_distance,load_index,collocation_factor,migrations,migration_latency_s,active_nodes\n"
            "3,milp,0.333333,100.000000,100.000000,2,2.500000,4\n");
}

TEST(RunCommand, CompareWritesOneFilePerOptimizerAndIsDeterministic) {
  const fs::path dir = scratch("compare");
  writeJson(dir / "scen.json", toJson(smallScenario()));
  RunManifest m;
  m.scenarioFiles = {(dir / "scen.json").string()};
  m.outDir = (dir / "out").string();
  m.compare = {"milp", "flux", "potc"};
  std::ostringstream log, err;
  ASSERT_EQ(runCommand(m, log, err), 0) << err.str();
  for (const char* k : {"milp", "flux", "potc"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / (std::string("scen.") + k + ".metrics.csv")));
  }
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "out" / "scen.tape.csv"));
  const std::string first = readFile((dir / "out" / "scen.milp.metrics.csv").string());
  const std::string summary = readFile((dir / "out" / "summary.csv").string());
  ASSERT_EQ(runCommand(m, log, err), 0);
  EXPECT_EQ(readFile((dir / "out" / "scen.milp.metrics.csv").string()), first);
  EXPECT_EQ(readFile((dir / "out" / "summary.csv").string()), summary);
}

TEST(RunCommand, MissingKeyFailsWithKeyNamed) {
  const fs::path dir = scratch("missing");
  Json doc = toJson(smallScenario());
  doc.erase("total_ticks");
  writeJson(dir / "bad.json", doc);
  RunManifest m;
  m.scenarioFiles = {(dir / "bad.json").string()};
  m.outDir = (dir / "out").string();
  std::ostringstream log, err;
  EXPECT_NE(runCommand(m, log, err), 0);
  EXPECT_NE(err.str().find("total_ticks"), std::string::npos);
}

TEST(RunCommand, ManifestOverrides) {
  const fs::path dir = scratch("manifest");
  writeJson(dir / "scen.json", toJson(smallScenario()));
  const Json manifest = {{"schema_version", 1}, {"scenarios", {"scen.json"}}, {"seed", 9},
                         {"ticks", 3},          {"max_migrations", 1}};
  const RunManifest m = manifestFromJson(manifest, dir.string());
  ASSERT_EQ(m.scenarioFiles.size(), 1u);
  const ScenarioConfig c = applyOverrides(scenarioFromJson(readJsonFile(m.scenarioFiles[0])), m.overrides);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.totalTicks, 3);
  EXPECT_EQ(c.optimizer.milp.budget.limit, 1.0);
  Json bad = manifest;
  bad["extra"] = true;
  EXPECT_THROW(manifestFromJson(bad, dir.string()), ValidationError);
}

TEST(SolveCommand, BalancedSnapshotNeedsNoMigrations) {
  const fs::path dir = scratch("solve");
  writeJson(dir / "snap.json", toJson(makeCluster({{25, 25}, {20, 30}})));
  SolveRequest r;
  r.snapshotFile = (dir / "snap.json").string();
  r.outFile = (dir / "plan.json").string();
  std::ostringstream log, err;
  ASSERT_EQ(solveCommand(r, log, err), 0) << err.str();
  const Json plan = readJsonFile(r.outFile);
  EXPECT_TRUE(plan["migrations"].empty());
  EXPECT_EQ(plan["schema_version"], 1);
}

TEST(SolveCommand, DrainsKilledNodeAndMatchesBruteForce) {
  const fs::path dir = scratch("solve_kill");
  writeJson(dir / "snap.json", toJson(makeCluster({{20, 10}, {15}, {6, 9}}, {2})));
  for (const char* opt : {"milp", "brute"}) {
    SolveRequest r;
    r.snapshotFile = (dir / "snap.json").string();
    r.outFile = (dir / (std::string(opt) + ".json")).string();
    r.optimizer = opt;
    std::ostringstream log, err;
    ASSERT_EQ(solveCommand(r, log, err), 0) << err.str();
    const Json plan = readJsonFile(r.outFile);
    for (const auto& a : plan["assignment"]) EXPECT_NE(a["node"], 2);
  }
  EXPECT_EQ(readJsonFile((dir / "milp.json").string())["objective"]["value"],
            readJsonFile((dir / "brute.json").string())["objective"]["value"]);
}

TEST(SolveCommand, OversizeBruteForceAndInfeasibleFail) {
  const fs::path dir = scratch("solve_big");
  writeJson(dir / "snap.json", toJson(makeCluster({std::vector<double>(14, 1.0), {}, {}, {}})));
  SolveRequest r;
  r.snapshotFile = (dir / "snap.json").string();
  r.optimizer = "brute";
  std::ostringstream log, err;
  EXPECT_NE(solveCommand(r, log, err), 0);
  EXPECT_NE(err.str().find("limited"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  writeJson(dir / "scen.json", toJson(smallScenario()));
  Json bad = toJson(smallScenario());
  bad.erase("operators");
  writeJson(dir / "bad.json", bad);
  const std::string cli = RECONF_CLI_PATH;
  auto run = [&](const std::string& args) {
    return std::system((cli + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
  };
  EXPECT_EQ(run("validate " + (dir / "scen.json").string()), 0);
  EXPECT_NE(run("validate " + (dir / "bad.json").string()), 0);
  EXPECT_NE(readFile((dir / "log.txt").string()).find("operators"), std::string::npos);
  EXPECT_EQ(run("run " + (dir / "scen.json").string() + " --out " + (dir / "o").string() + " --ticks 3 --seed 4"), 0);
  EXPECT_TRUE(fs::exists(dir / "o" / "scen.milp.metrics.csv"));
  EXPECT_NE(run("run " + (dir / "scen.json").string() + " --max-migrations 2 --max-migr-cost 3"), 0);
  EXPECT_NE(run("frobnicate"), 0);
}

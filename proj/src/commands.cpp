#include "reconf/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "reconf/stats.hpp"

namespace reconf {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string csvField(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

bool isManifest(const Json& doc) { return doc.is_object() && doc.contains("scenarios"); }
bool isScenario(const Json& doc) { return doc.is_object() && doc.contains("key_groups_per_operator"); }
bool isSnapshot(const Json& doc) { return doc.is_object() && doc.contains("key_groups"); }
bool isGraph(const Json& doc) { return doc.is_object() && doc.contains("vertices"); }

MilpConfig withBudgetOverrides(MilpConfig milp, const Overrides& o) {
  if (o.maxMigrations && o.maxMigrCost) throw Error("--max-migrations and --max-migr-cost are mutually exclusive");
  if (o.maxMigrations) milp.budget = MigrationBudget::count(*o.maxMigrations);
  if (o.maxMigrCost) milp.budget = MigrationBudget::cost(*o.maxMigrCost);
  if (o.seed) milp.seed = *o.seed;
  return milp;
}

struct SummaryRow {
  std::string scenario;
  std::string optimizer;
  std::size_t samples = 0;
  double finalLoadDistance = 0.0;
  double meanLoadDistance = 0.0;
  double finalLoadIndex = 100.0;
  double finalCollocationFactor = 100.0;
  std::size_t totalMigrations = 0;
  double maxBudgetSpent = 0.0;
  double budgetLimit = 0.0;
  std::string error;
};

SummaryRow summarize(const std::string& scenario, const MetricsSeries& series) {
  SummaryRow row;
  row.scenario = scenario;
  row.optimizer = series.optimizer;
  row.samples = series.samples.size();
  row.budgetLimit = series.budgetLimit;
  for (const auto& s : series.samples) {
    row.meanLoadDistance += s.loadDistance;
    row.totalMigrations += s.migrations;
    row.maxBudgetSpent = std::max(row.maxBudgetSpent, s.budgetSpent);
  }
  if (!series.samples.empty()) {
    const auto& last = series.samples.back();
    row.meanLoadDistance /= static_cast<double>(series.samples.size());
    row.finalLoadDistance = last.loadDistance;
    row.finalLoadIndex = last.loadIndex;
    row.finalCollocationFactor = last.collocationFactor;
  }
  row.error = series.error.value_or("");
  return row;
}

std::string summaryCsv(const std::vector<SummaryRow>& rows) {
  std::string out =
      "scenario,optimizer,samples,final_load_distance,mean_load_distance,final_load_index,"
      "final_collocation_factor,total_migrations,max_budget_spent,budget_limit,error\n";
  for (const auto& r : rows) {
    out += csvField(r.scenario) + ',' + r.optimizer + ',' + std::to_string(r.samples) + ',' +
           fixed(r.finalLoadDistance) + ',' + fixed(r.meanLoadDistance) + ',' + fixed(r.finalLoadIndex) + ',' +
           fixed(r.finalCollocationFactor) + ',' + std::to_string(r.totalMigrations) + ',' + fixed(r.maxBudgetSpent) +
           ',' + (std::isfinite(r.budgetLimit) ? fixed(r.budgetLimit) : std::string("inf")) + ',' +
           csvField(r.error) + '\n';
  }
  return out;
}

}  // namespace

RunManifest manifestFromJson(const Json& doc, const std::string& baseDir) {
  std::vector<std::string> bad;
  if (!doc.is_object()) throw ValidationError({"<root>"});
  RunManifest m;
  static const std::vector<std::string> known = {"schema_version", "scenarios", "out",     "seed",  "optimizer",
                                                 "max_migrations", "max_migr_cost", "max_ld", "ticks", "compare"};
  for (const auto& [k, v] : doc.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) bad.push_back(k);
  }
  auto read = [&](const char* key, auto& out) {
    if (!doc.contains(key)) return;
    try {
      out = doc.at(key).get<std::remove_reference_t<decltype(*out)>>();
    } catch (const nlohmann::json::exception&) {
      bad.push_back(key);
    }
  };
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != kSchemaVersion) {
    bad.push_back("schema_version");
  }
  try {
    for (const auto& s : doc.at("scenarios")) {
      const fs::path p(s.get<std::string>());
      m.scenarioFiles.push_back((p.is_absolute() || baseDir.empty() ? p : fs::path(baseDir) / p).string());
    }
    if (m.scenarioFiles.empty()) bad.push_back("scenarios");
  } catch (const nlohmann::json::exception&) {
    bad.push_back("scenarios");
  }
  if (doc.contains("out")) {
    try {
      m.outDir = doc["out"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
      bad.push_back("out");
    }
  }
  read("seed", m.overrides.seed);
  read("optimizer", m.overrides.optimizer);
  read("max_migrations", m.overrides.maxMigrations);
  read("max_migr_cost", m.overrides.maxMigrCost);
  read("max_ld", m.overrides.maxLD);
  read("ticks", m.overrides.ticks);
  if (doc.contains("compare")) {
    try {
      m.compare = doc["compare"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
      bad.push_back("compare");
    }
  }
  if (!bad.empty()) {
    std::sort(bad.begin(), bad.end());
    throw ValidationError(std::move(bad));
  }
  return m;
}

ScenarioConfig applyOverrides(ScenarioConfig config, const Overrides& o) {
  if (o.seed) config.seed = *o.seed;
  if (o.optimizer) config.optimizer.kind = parseOptimizerKind(*o.optimizer);
  MilpConfig milp = config.optimizer.milp;
  Overrides budgetOnly = o;
  budgetOnly.seed.reset();
  config.optimizer.milp = withBudgetOverrides(milp, budgetOnly);
  if (o.maxLD) {
    config.optimizer.albic.maxLD = *o.maxLD;
    config.optimizer.colaMaxLD = *o.maxLD;
    config.scaling.maxLD = *o.maxLD;
  }
  if (o.ticks) config.totalTicks = *o.ticks;
  config.validate();
  return config;
}

int runCommand(const RunManifest& manifest, std::ostream& log, std::ostream& err) {
  if (manifest.scenarioFiles.empty()) {
    err << "error: no scenario files given\n";
    return 2;
  }
  struct Job {
    std::string name;
    ScenarioConfig config;
  };
  std::vector<Job> jobs;
  std::map<std::string, int> nameCount;
  try {
    for (const auto& file : manifest.scenarioFiles) {
      std::string name = fs::path(file).stem().string();
      if (int n = nameCount[name]++; n > 0) name += "_" + std::to_string(n);
      jobs.push_back({name, applyOverrides(scenarioFromJson(readJsonFile(file)), manifest.overrides)});
    }
    for (const auto& k : manifest.compare) parseOptimizerKind(k);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  std::vector<SummaryRow> rows;
  bool failed = false;
  try {
    for (const auto& job : jobs) {
      const GeneratedScenario scenario = generateScenario(job.config);
      writeFileAtomic((fs::path(manifest.outDir) / (job.name + ".tape.csv")).string(), tapeCsv(scenario.tape));
      std::vector<std::string> kinds = manifest.compare;
      if (kinds.empty()) kinds.push_back(to_string(job.config.optimizer.kind));
      for (const auto& kind : kinds) {
        ScenarioConfig cfg = job.config;
        cfg.optimizer.kind = parseOptimizerKind(kind);
        const MetricsSeries series = runScenario(cfg, scenario);
        const std::string file = (fs::path(manifest.outDir) / (job.name + "." + kind + ".metrics.csv")).string();
        writeFileAtomic(file, metricsCsv(series));
        rows.push_back(summarize(job.name, series));
        log << file << '\n';
        if (series.error) {
          failed = true;
          err << "error: " << job.name << "/" << kind << ": " << *series.error << '\n';
        }
      }
    }
    writeFileAtomic((fs::path(manifest.outDir) / "summary.csv").string(), summaryCsv(rows));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return failed ? 1 : 0;
}

int solveCommand(const SolveRequest& request, std::ostream& log, std::ostream& err) {
  try {
    const Json doc = readJsonFile(request.snapshotFile);
    const ClusterState cluster = clusterFromJson(doc);
    const TrafficMatrix traffic = doc.contains("traffic") ? trafficFromJson(doc["traffic"]) : TrafficMatrix{};
    OptimizerSettings settings;
    settings.milp = withBudgetOverrides(settings.milp, request.overrides);
    if (request.overrides.maxLD) {
      settings.albic.maxLD = *request.overrides.maxLD;
      settings.colaMaxLD = *request.overrides.maxLD;
    }

    PlanReport report;
    report.optimizer = request.optimizer;
    const MilpModel model = buildModel(cluster, settings.milp);
    if (request.optimizer == "milp" || request.optimizer == "brute") {
      const MilpSolution sol = request.optimizer == "milp" ? solve(model) : bruteForceSolve(model);
      report.plan = sol.plan;
      report.objectiveValue = sol.objectiveValue;
      report.bestBound = sol.bestBound;
      report.optimal = sol.optimal;
    } else {
      settings.kind = parseOptimizerKind(request.optimizer);
      auto optimizer = makeOptimizer(settings);
      report.plan = optimizer->plan(cluster, traffic, settings.milp.seed);
      std::vector<std::size_t> nodeOf;
      for (KeyGroupId g : model.groups) nodeOf.push_back(cluster.nodeIndex(report.plan.assignment.at(g)));
      report.objectiveValue = evaluate(model, nodeOf).objective;
      report.bestBound = -std::numeric_limits<double>::infinity();
    }
    report.budgetSpent = settings.milp.budget.spent(cluster, report.plan);
    report.loadDistanceAfter = loadDistance(applyAssignment(cluster, report.plan));
    Json out = toJson(report);
    if (!std::isfinite(report.bestBound)) out["objective"]["best_bound"] = nullptr;
    const std::string text = out.dump(2) + "\n";
    if (request.outFile.empty() || request.outFile == "-") {
      log << text;
    } else {
      writeFileAtomic(request.outFile, text);
      log << request.outFile << ": " << report.plan.migrations.size() << " migrations, load distance "
          << fixed(report.loadDistanceAfter) << '\n';
    }
    return 0;
  } catch (const InfeasibleError& e) {
    err << "error: infeasible: " << e.what() << "; best bound "
        << (std::isfinite(e.bestBound()) ? fixed(e.bestBound()) : std::string(e.bestBound() > 0 ? "inf" : "-inf"))
        << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int partitionCommand(const PartitionRequest& request, std::ostream& log, std::ostream& err) {
  try {
    const WeightedGraph graph = graphFromJson(readJsonFile(request.graphFile));
    const Partition parts = balancedPartition(graph, request.parts, request.tolerance, request.seed);
    const std::string text = partitionToJson(graph, parts).dump(2) + "\n";
    if (request.outFile.empty() || request.outFile == "-") {
      log << text;
    } else {
      writeFileAtomic(request.outFile, text);
      log << request.outFile << ": cut " << fixed(cutWeight(graph, parts)) << '\n';
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int validateCommand(const std::string& file, std::ostream& log, std::ostream& err) {
  try {
    const Json doc = readJsonFile(file);
    if (isManifest(doc)) {
      const RunManifest m = manifestFromJson(doc, fs::path(file).parent_path().string());
      for (const auto& s : m.scenarioFiles) applyOverrides(scenarioFromJson(readJsonFile(s)), m.overrides);
      log << file << ": valid manifest (" << m.scenarioFiles.size() << " scenarios)\n";
    } else if (isScenario(doc)) {
      scenarioFromJson(doc);
      log << file << ": valid scenario\n";
    } else if (isSnapshot(doc)) {
      clusterFromJson(doc);
      if (doc.contains("traffic")) trafficFromJson(doc["traffic"]);
      log << file << ": valid snapshot\n";
    } else if (isGraph(doc)) {
      graphFromJson(doc);
      log << file << ": valid graph\n";
    } else {
      err << "error: " << file << ": unrecognized document (no scenarios, key_groups_per_operator, key_groups or vertices key)\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << file << ": " << e.what() << '\n';
    return 2;
  }
}

}  // namespace reconf

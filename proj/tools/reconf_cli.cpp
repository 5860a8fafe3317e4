#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "reconf/commands.hpp"

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> optimizer;
  std::optional<std::size_t> maxMigrations;
  std::optional<double> maxMigrCost;
  std::optional<double> maxLD;
  std::optional<int> ticks;

  void attach(CLI::App* app, bool withOptimizer) {
    app->add_option("--seed", seed, "Seed for every random choice");
    if (withOptimizer) app->add_option("--optimizer", optimizer, "milp, albic, flux, potc, cola or sequential");
    auto* count = app->add_option("--max-migrations", maxMigrations, "Per-round migration count budget");
    auto* cost = app->add_option("--max-migr-cost", maxMigrCost, "Per-round migration cost budget");
    count->excludes(cost);
    app->add_option("--max-ld", maxLD, "Target load distance")->check(CLI::PositiveNumber);
    app->add_option("--ticks", ticks, "Simulated ticks")->check(CLI::PositiveNumber);
  }

  void mergeInto(reconf::Overrides& o) const {
    if (seed) o.seed = seed;
    if (optimizer) o.optimizer = optimizer;
    if (maxMigrations || maxMigrCost) {
      o.maxMigrations = maxMigrations;
      o.maxMigrCost = maxMigrCost;
    }
    if (maxLD) o.maxLD = maxLD;
    if (ticks) o.ticks = ticks;
  }
};

std::vector<std::string> splitList(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string::npos ? s.size() : comma;
    if (end > start) out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

// Expands manifest files and collects plain scenario files into one manifest.
int buildManifest(const std::vector<std::string>& files, reconf::RunManifest& manifest, std::ostream& err) {
  for (const auto& f : files) {
    try {
      const auto doc = reconf::readJsonFile(f);
      if (doc.is_object() && doc.contains("scenarios")) {
        const auto m = reconf::manifestFromJson(doc, std::filesystem::path(f).parent_path().string());
        manifest.scenarioFiles.insert(manifest.scenarioFiles.end(), m.scenarioFiles.begin(), m.scenarioFiles.end());
        manifest.outDir = m.outDir;
        manifest.overrides = m.overrides;
        if (!m.compare.empty()) manifest.compare = m.compare;
      } else {
        manifest.scenarioFiles.push_back(f);
      }
    } catch (const std::exception& e) {
      err << "error: " << f << ": " << e.what() << '\n';
      return 2;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Load balancing, scale-in and collocation planning for partitioned stream operators"};
  app.require_subcommand(1);

  CommonFlags runFlags;
  std::vector<std::string> runFiles;
  std::optional<std::string> runOut;
  auto* run = app.add_subcommand("run", "Simulate scenario or manifest files and write metrics CSVs");
  run->add_option("files", runFiles, "Scenario or manifest JSON files")->required()->check(CLI::ExistingFile);
  run->add_option("--out", runOut, "Output directory");
  runFlags.attach(run, true);

  CommonFlags cmpFlags;
  std::vector<std::string> cmpFiles;
  std::optional<std::string> cmpOut;
  std::string cmpList = "milp,flux,potc";
  auto* compare = app.add_subcommand("compare", "Run several optimizers on one shared workload tape");
  compare->add_option("files", cmpFiles, "Scenario JSON files")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", cmpOut, "Output directory");
  compare->add_option("--optimizers", cmpList, "Comma-separated optimizer list")->capture_default_str();
  cmpFlags.attach(compare, false);

  CommonFlags solveFlags;
  reconf::SolveRequest solveReq;
  auto* solve = app.add_subcommand("solve", "Plan one adaptation round for a cluster snapshot");
  solve->add_option("snapshot", solveReq.snapshotFile, "Snapshot JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", solveReq.outFile, "Plan JSON output (stdout when omitted)");
  solve->add_option("--optimizer", solveReq.optimizer, "milp, brute, albic, flux, potc, cola or sequential")
      ->capture_default_str();
  solveFlags.attach(solve, false);

  reconf::PartitionRequest partReq;
  auto* part = app.add_subcommand("partition", "Balanced min-cut partition of a weighted graph");
  part->add_option("graph", partReq.graphFile, "Graph JSON")->required()->check(CLI::ExistingFile);
  part->add_option("--parts", partReq.parts, "Number of parts")->required()->check(CLI::PositiveNumber);
  part->add_option("--tol", partReq.tolerance, "Imbalance tolerance")->capture_default_str();
  part->add_option("--seed", partReq.seed, "Seed")->capture_default_str();
  part->add_option("--out", partReq.outFile, "Partition JSON output (stdout when omitted)");

  std::vector<std::string> validateFiles;
  auto* validate = app.add_subcommand("validate", "Check manifest, scenario, snapshot or graph files");
  validate->add_option("files", validateFiles, "JSON files")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  if (*run || *compare) {
    const bool isRun = static_cast<bool>(*run);
    reconf::RunManifest manifest;
    if (int rc = buildManifest(isRun ? runFiles : cmpFiles, manifest, std::cerr); rc != 0) return rc;
    const auto& out = isRun ? runOut : cmpOut;
    if (out) manifest.outDir = *out;
    (isRun ? runFlags : cmpFlags).mergeInto(manifest.overrides);
    if (!isRun) manifest.compare = splitList(cmpList);
    return reconf::runCommand(manifest, std::cout, std::cerr);
  }
  if (*solve) {
    solveFlags.mergeInto(solveReq.overrides);
    return reconf::solveCommand(solveReq, std::cout, std::cerr);
  }
  if (*part) return reconf::partitionCommand(partReq, std::cout, std::cerr);
  int rc = 0;
  for (const auto& f : validateFiles) rc = std::max(rc, reconf::validateCommand(f, std::cout, std::cerr));
  return rc;
}

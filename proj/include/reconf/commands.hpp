#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "reconf/io.hpp"
#include "reconf/sim.hpp"

namespace reconf {

/// Overrides applied on top of every scenario file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> optimizer;
  std::optional<std::size_t> maxMigrations;
  std::optional<double> maxMigrCost;
  std::optional<double> maxLD;
  std::optional<int> ticks;
};

struct RunManifest {
  std::vector<std::string> scenarioFiles;
  std::string outDir = "out";
  Overrides overrides;
  std::vector<std::string> compare;  // optimizers run on one shared tape; empty runs the scenario's own
};

/// Manifest document: {"schema_version", "scenarios": [...], "out", "seed", "optimizer",
/// "max_migrations", "max_migr_cost", "max_ld", "ticks", "compare": [...]}.
/// Relative scenario paths resolve against `baseDir`.
RunManifest manifestFromJson(const Json& doc, const std::string& baseDir);

ScenarioConfig applyOverrides(ScenarioConfig config, const Overrides& overrides);

/// Writes <out>/<scenario>.<optimizer>.metrics.csv per run, <out>/<scenario>.tape.csv
/// per scenario and <out>/summary.csv. Returns the process exit status.
int runCommand(const RunManifest& manifest, std::ostream& log, std::ostream& err);

struct SolveRequest {
  std::string snapshotFile;
  std::string outFile;
  std::string optimizer = "milp";  // any optimizer kind, or "brute"
  Overrides overrides;
};

int solveCommand(const SolveRequest& request, std::ostream& log, std::ostream& err);

struct PartitionRequest {
  std::string graphFile;
  std::string outFile;
  std::size_t parts = 2;
  double tolerance = 0.10;
  std::uint64_t seed = 0;
};

int partitionCommand(const PartitionRequest& request, std::ostream& log, std::ostream& err);

/// Detects the document type (manifest, scenario, snapshot, graph) and validates it.
int validateCommand(const std::string& file, std::ostream& log, std::ostream& err);

}  // namespace reconf

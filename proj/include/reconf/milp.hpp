#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reconf/core.hpp"

namespace reconf {

/// Per-round bound on state migration: either total migration cost or the
/// number of migrated key groups (unit costs).
struct MigrationBudget {
  enum class Mode { Cost, Count };

  Mode mode = Mode::Cost;
  double limit = std::numeric_limits<double>::infinity();

  static MigrationBudget cost(double maxMigrCost) { return {Mode::Cost, maxMigrCost}; }
  static MigrationBudget count(std::size_t maxMigrations) {
    return {Mode::Count, static_cast<double>(maxMigrations)};
  }
  static MigrationBudget unbounded() { return {}; }

  bool isUnbounded() const { return limit == std::numeric_limits<double>::infinity(); }

  /// Budget units consumed by migrating key group `stat`.
  double costOf(const KeyGroupStat& stat) const { return mode == Mode::Count ? 1.0 : stat.migrCost; }

  /// Budget units consumed by a whole plan.
  double spent(const ClusterState& cluster, const AllocationPlan& plan) const;
};

struct MilpConfig {
  double w1 = 1000.0;
  double w2 = 1.0;
  double wB = 10000.0;  // weight of the migration cost left on nodes marked for removal
  MigrationBudget budget;
  double timeLimit = 5.0;  // seconds; a safety net, normal runs stop on iteration limits
  std::uint64_t seed = 0;
  std::size_t maxKicks = 24;                  // local-search perturbation rounds
  std::size_t branchUnitLimit = 30;           // run exact branch-and-bound up to this many units
  std::size_t branchNodeLimit = 20'000'000;   // search nodes before giving up on a proof

  /// Throws when w1 < 100 * w2, weights are non-positive, or the budget is negative.
  void validate() const;
};

/// Pins every listed key group to `targetNode` (ALBIC step 3).
struct CollocationConstraint {
  std::vector<KeyGroupId> groups;
  NodeId targetNode;
};

/// Key groups that must be placed on one node, wherever that is (ALBIC step 2
/// partitions, migrated as indivisible units).
struct IndivisibleGroup {
  std::vector<KeyGroupId> members;
};

enum class ConstraintKind {
  Assignment,   // (1) each key group on exactly one node
  Budget,       // (2) migration cost bound
  UpperLoad,    // (3) per node, all of N
  LowerLoad,    // (4) per node in A only
  MeanFloor,    // (5) mean - d >= 0
  Indivisible,  // x_{i,a} = x_{i,b} linking rows
  Pin,          // x_{target,k} = 1
  NoInflow,     // x_{i,k} = 0 for nodes in B not currently holding k
};

/// Dense MILP instance. Index spaces: nodes [0, nodes.size()), key groups
/// [0, groups.size()). Binaries x_{i,k} are implicit; the solver works on
/// units (connected components of indivisible/pin constraints).
struct MilpModel {
  MilpConfig config;

  std::vector<NodeId> nodes;
  std::vector<double> capacity;
  std::vector<bool> kill;

  std::vector<KeyGroupId> groups;
  std::vector<double> gLoad;
  std::vector<double> migrCost;     // budget units (1 per group in count mode)
  std::vector<std::size_t> current; // q: node index currently holding each group

  double mean = 0.0;  // ceil(sum of node loads / |A|), fixed before solving

  std::vector<CollocationConstraint> pins;
  std::vector<IndivisibleGroup> indivisible;

  /// Units of co-placed groups (ascending by smallest member) with an optional pinned node.
  std::vector<std::vector<std::size_t>> units;
  std::vector<std::optional<std::size_t>> unitTarget;

  // Extension point for per-resource capacity rows (non-bottleneck resources).
  // Not populated: the model is one-dimensional.

  std::size_t activeCount() const;
  std::size_t binaryCount() const { return nodes.size() * groups.size(); }
  std::size_t constraintCount(ConstraintKind kind) const;

  /// LP-format rendering, one constraint per line.
  std::string toLpFormat() const;
};

/// Objective terms of one complete assignment (node index per key group).
struct ModelEvaluation {
  double d = 0.0;
  double du = 0.0;
  double dl = 0.0;
  double costB = 0.0;  // migration cost of the groups left on nodes marked for removal
  double objective = 0.0;
  double migrCost = 0.0;  // budget units
  bool feasible = false;
};

ModelEvaluation evaluate(const MilpModel& model, std::span<const std::size_t> nodeOfGroup);

struct MilpSolution {
  AllocationPlan plan;
  std::vector<std::size_t> nodeOfGroup;
  double objectiveValue = 0.0;
  double bestBound = -std::numeric_limits<double>::infinity();
  bool optimal = false;
  double solveTime = 0.0;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double bestBound) : Error(what), bestBound_(bestBound) {}
  double bestBound() const { return bestBound_; }

 private:
  double bestBound_;
};

/// Throws Error on an empty A set and InfeasibleError on contradictory pins.
MilpModel buildModel(const ClusterState& cluster, const MilpConfig& config,
                     std::span<const CollocationConstraint> pins = {},
                     std::span<const IndivisibleGroup> indivisible = {});

/// Local search for an incumbent, then exact branch-and-bound when the instance is
/// small enough. Deterministic for a given model (seed included) unless the time
/// limit cuts the search short.
MilpSolution solve(const MilpModel& model);

inline constexpr double kBruteForceLimit = 1e7;

/// Full enumeration in lexicographic order of (keyGroup, node); keeps the first
/// assignment with the strictly smallest objective. Throws when
/// |nodes|^|groups| exceeds kBruteForceLimit.
MilpSolution bruteForceSolve(const MilpModel& model);

/// Lower bound on d from the continuous relaxation (fractional migrations).
double relaxationBoundD(const MilpModel& model);

/// Convenience: build + solve.
MilpSolution solveMilp(const ClusterState& cluster, const MilpConfig& config,
                       std::span<const CollocationConstraint> pins = {},
                       std::span<const IndivisibleGroup> indivisible = {});

}  // namespace reconf

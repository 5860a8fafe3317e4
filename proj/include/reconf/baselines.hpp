#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "reconf/core.hpp"
#include "reconf/milp.hpp"

namespace reconf {

// ---- Flux ----------------------------------------------------------------

/// Pairs the i-th heaviest node of A with the i-th lightest and moves the largest
/// key group that narrows the gap without overshooting it, pass after pass, until
/// nothing moves or the budget is spent. Never moves load into B.
AllocationPlan fluxRebalance(const ClusterState& cluster, const MigrationBudget& budget);

inline AllocationPlan fluxRebalance(const ClusterState& cluster, std::size_t maxMigrations) {
  return fluxRebalance(cluster, MigrationBudget::count(maxMigrations));
}

// ---- Power of two choices --------------------------------------------------

struct PotcConfig {
  std::uint64_t hashSeed = 0;
  std::size_t keysPerGroup = 8;  // routing keys per key group
  int mergeIntervalTicks = 1;
  double mergeCostFactor = 0.05;  // load points per unit of split state

  void validate() const;
};

/// Routing state: per key, the state volume accumulated on each instance.
class PotcState {
 public:
  explicit PotcState(PotcConfig config);

  const PotcConfig& config() const { return config_; }

  NodeId h1(std::uint64_t key, const std::vector<NodeId>& live) const;
  NodeId h2(std::uint64_t key, const std::vector<NodeId>& live) const;

  /// Records `volume` units of state produced for `key` on `node`.
  void record(std::uint64_t key, NodeId node, double volume);

  /// Number of instances currently holding state of `key`.
  std::size_t instancesOf(std::uint64_t key) const;

  /// Per node: split state volume it must merge (state of its h1 keys living elsewhere).
  std::map<NodeId, double> splitVolume(const std::vector<NodeId>& live) const;

  /// Consolidates every key's state on its h1 instance.
  void merge(const std::vector<NodeId>& live);

 private:
  PotcConfig config_;
  std::map<std::uint64_t, std::map<NodeId, double>> state_;
};

/// Less loaded of h1(key) and h2(key); ties go to h1.
NodeId potcRoute(const PotcState& state, std::uint64_t key, const std::vector<NodeId>& live,
                 const std::map<NodeId, double>& downstreamLoads);

/// mergeCostFactor x split state volume, charged to the merging (h1) node.
std::map<NodeId, double> potcMergeLoad(const PotcState& state, const ClusterState& cluster);

/// Routes every key of every key group for one statistics period and returns
/// the resulting node loads (aligned with cluster.nodes), merge load included
/// when `mergeTick` is set.
std::vector<double> potcPeriodLoads(PotcState& state, const ClusterState& cluster, bool mergeTick);

// ---- COLA ------------------------------------------------------------------

struct ColaResult {
  AllocationPlan plan;
  std::size_t partitions = 0;
  std::size_t splits = 0;
};

/// From-scratch allocation: one partition of everything, split the heaviest
/// partition in two until a greedy placement meets maxLD or only singletons remain.
ColaResult colaSolve(const ClusterState& cluster, const TrafficMatrix& traffic, double maxLD, std::uint64_t seed);

inline AllocationPlan colaAllocate(const ClusterState& cluster, const TrafficMatrix& traffic, double maxLD,
                                   std::uint64_t seed) {
  return colaSolve(cluster, traffic, maxLD, seed).plan;
}

// ---- Sequential scale-in ---------------------------------------------------

/// Non-integrated scale-in: while B holds key groups, spend the whole budget on
/// moving them to the lightest nodes of A; balance with the MILP only afterwards.
AllocationPlan sequentialDrainThenBalance(const ClusterState& cluster, const MilpConfig& config);

}  // namespace reconf

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "reconf/core.hpp"
#include "reconf/milp.hpp"

namespace reconf {

struct AlbicConfig {
  double maxLD = 10.0;
  double maxPL = 25.0;  // initial bound on a partition's load
  double stepPL = 5.0;
  double sF = 1.5;
  MilpConfig milp;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PairScore {
  KeyGroupId src;
  KeyGroupId dst;
  double rate = 0.0;
  bool collocated = false;
};

struct ScoredPairs {
  std::vector<PairScore> colGrps;      // qualifying and already on one node
  std::vector<PairScore> toBeColGrps;  // qualifying but split across nodes
};

/// Classifies every qualifying upstream-to-downstream pair.
ScoredPairs scorePairs(const TrafficMatrix& traffic, const ClusterState& cluster, double sF);

struct CollocationPartition {
  std::vector<KeyGroupId> members;
  double totalLoad = 0.0;
  double totalMigrCost = 0.0;  // budget units
};

/// Merges collocated pairs into disjoint sets and splits each set until it fits
/// both config.maxPL and the migration budget. Singleton parts are dropped.
std::vector<CollocationPartition> maintainPartitions(const std::vector<PairScore>& colGrps,
                                                     const ClusterState& cluster, const TrafficMatrix& traffic,
                                                     const AlbicConfig& config);

/// Builds the pin for the heaviest not-yet-collocated pair; nullopt when there is none
/// or when every candidate sits on nodes marked for removal.
std::optional<CollocationConstraint> improveCollocation(const std::vector<PairScore>& toBeColGrps,
                                                        const std::vector<CollocationPartition>& partitions,
                                                        const ClusterState& cluster, std::uint64_t seed);

struct AlbicResult {
  MilpSolution solution;
  std::optional<CollocationConstraint> constraint;  // the pin used by the returned plan
  std::size_t partitions = 0;
  std::size_t recursions = 0;  // times maxPL was lowered
  double finalMaxPL = 0.0;
  bool pureMilp = false;
};

/// Full ALBIC round; throws InfeasibleError when even the pure MILP has no solution.
AlbicResult albicSolve(const ClusterState& cluster, const TrafficMatrix& traffic, const AlbicConfig& config);

inline AllocationPlan albic(const ClusterState& cluster, const TrafficMatrix& traffic, const AlbicConfig& config) {
  return albicSolve(cluster, traffic, config).solution.plan;
}

}  // namespace reconf

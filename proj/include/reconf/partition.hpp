#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "reconf/core.hpp"

namespace reconf {

/// Undirected graph over key groups. Edge keys are stored with the smaller id first.
struct WeightedGraph {
  std::map<KeyGroupId, double> vertices;
  std::map<std::pair<KeyGroupId, KeyGroupId>, double> edges;

  void addVertex(KeyGroupId v, double weight);
  /// Adds `weight` to the edge {a, b}; both endpoints must already exist.
  void addEdge(KeyGroupId a, KeyGroupId b, double weight);
  double totalVertexWeight() const;
  void validate() const;
};

using Partition = std::vector<std::vector<KeyGroupId>>;

/// Sum of edge weights whose endpoints lie in different parts.
double cutWeight(const WeightedGraph& graph, const Partition& parts);

/// Largest part weight balancedPartition may produce: (1 + tol) * average, widened
/// to average + (1 - 1/parts) * heaviest vertex so that a feasible split always exists.
double partitionCapacity(const WeightedGraph& graph, std::size_t parts, double imbalanceTol);

/// Splits the graph into exactly `parts` non-empty parts of weight at most
/// partitionCapacity(), heuristically minimizing the cut. Parts are ordered by
/// their smallest member; members ascend. Deterministic for a given seed.
Partition balancedPartition(const WeightedGraph& graph, std::size_t parts, double imbalanceTol = 0.10,
                            std::uint64_t seed = 0);

}  // namespace reconf

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reconf/core.hpp"

namespace reconf {

struct StatisticsWindow {
  int splTicks = 1;
  std::map<std::string, double> perResourceTotals;
  std::optional<double> baselineAvgLoad;
};

/// ceil(sum of all node loads / |A|). Throws when every node is marked for removal.
double meanLoad(const ClusterState& cluster);

/// max over nodes in A of |load - meanLoad|.
double loadDistance(const ClusterState& cluster);

/// Sum of node loads divided by the number of nodes present (A and B).
double averageSystemLoad(const ClusterState& cluster);

/// 100 * averageSystemLoad / baseline. Throws when the baseline is unset.
double loadIndex(const ClusterState& cluster, const StatisticsWindow& window);

/// Resource with the greatest total usage; ties go to the lexicographically smallest name.
std::string bottleneckResource(const StatisticsWindow& window);

struct QualifyingFlow {
  KeyGroupId src;
  KeyGroupId dst;
  double rate = 0.0;
};

/// Upstream-to-downstream pairs whose rate exceeds avg(src) * sF, where
/// avg(src) = out(src) / (key groups of all operators downstream of src's operator).
std::vector<QualifyingFlow> qualifyingFlows(const ClusterState& cluster, const TrafficMatrix& traffic,
                                            double sF);

/// Traffic-weighted share (percent) of qualifying flows whose endpoints share
/// a node. 100 when nothing qualifies.
double collocationFactor(const ClusterState& cluster, const TrafficMatrix& traffic, double sF);

}  // namespace reconf

#include "reconf/stats.hpp"

#include <algorithm>
#include <cmath>

namespace reconf {

namespace {

// Sums of real-valued loads pick up rounding noise; an exact integer sum must
// not be bumped to the next integer by it.
double ceilTolerant(double x) { return std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))); }

}  // namespace

double meanLoad(const ClusterState& cluster) {
  const std::size_t active = cluster.activeCount();
  if (active == 0) throw Error("meanLoad: every node is marked for removal");
  double total = 0.0;
  for (double l : nodeLoads(cluster)) total += l;
  return ceilTolerant(total / static_cast<double>(active));
}

double loadDistance(const ClusterState& cluster) {
  const double mean = meanLoad(cluster);
  const auto loads = nodeLoads(cluster);
  double dist = 0.0;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    if (!cluster.nodes[i].kill) dist = std::max(dist, std::abs(loads[i] - mean));
  }
  return dist;
}

double averageSystemLoad(const ClusterState& cluster) {
  if (cluster.nodes.empty()) return 0.0;
  double total = 0.0;
  for (double l : nodeLoads(cluster)) total += l;
  return total / static_cast<double>(cluster.nodes.size());
}

double loadIndex(const ClusterState& cluster, const StatisticsWindow& window) {
  if (!window.baselineAvgLoad || !(*window.baselineAvgLoad > 0.0)) {
    throw Error("loadIndex: baseline average load is not set");
  }
  return 100.0 * averageSystemLoad(cluster) / *window.baselineAvgLoad;
}

std::string bottleneckResource(const StatisticsWindow& window) {
  if (window.perResourceTotals.empty()) throw Error("bottleneckResource: no resource tracked");
  // std::map iterates names in lexicographic order, so the first maximum wins ties.
  auto best = window.perResourceTotals.begin();
  for (auto it = window.perResourceTotals.begin(); it != window.perResourceTotals.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

std::vector<QualifyingFlow> qualifyingFlows(const ClusterState& cluster, const TrafficMatrix& traffic,
                                            double sF) {
  std::map<OperatorId, std::size_t> groupsPerOp;
  for (const auto& [g, s] : cluster.stats) ++groupsPerOp[s.op];

  std::map<OperatorId, std::size_t> downstreamGroups;
  for (const auto& [op, downs] : traffic.downstream) {
    std::size_t n = 0;
    for (OperatorId d : downs) {
      auto it = groupsPerOp.find(d);
      if (it != groupsPerOp.end()) n += it->second;
    }
    downstreamGroups[op] = n;
  }

  std::vector<QualifyingFlow> flows;
  auto it = traffic.rates.begin();
  while (it != traffic.rates.end()) {
    const KeyGroupId src = it->first.first;
    auto end = it;
    double out = 0.0;
    while (end != traffic.rates.end() && end->first.first == src) {
      out += end->second;
      ++end;
    }
    auto srcStat = cluster.stats.find(src);
    if (srcStat != cluster.stats.end()) {
      const OperatorId op = srcStat->second.op;
      auto dsIt = downstreamGroups.find(op);
      const auto& downs = traffic.downstream.count(op) ? traffic.downstream.at(op) : std::set<OperatorId>{};
      if (dsIt != downstreamGroups.end() && dsIt->second > 0) {
        const double threshold = out / static_cast<double>(dsIt->second) * sF;
        for (auto f = it; f != end; ++f) {
          auto dstStat = cluster.stats.find(f->first.second);
          if (dstStat == cluster.stats.end() || !downs.contains(dstStat->second.op)) continue;
          if (f->second > threshold) flows.push_back({src, f->first.second, f->second});
        }
      }
    }
    it = end;
  }
  return flows;
}

double collocationFactor(const ClusterState& cluster, const TrafficMatrix& traffic, double sF) {
  double local = 0.0;
  double total = 0.0;
  for (const auto& f : qualifyingFlows(cluster, traffic, sF)) {
    total += f.rate;
    if (cluster.allocation.at(f.src) == cluster.allocation.at(f.dst)) local += f.rate;
  }
  return total > 0.0 ? 100.0 * local / total : 100.0;
}

}  // namespace reconf

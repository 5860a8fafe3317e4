#include <algorithm>
#include <numeric>

#include "reconf/baselines.hpp"

namespace reconf {

AllocationPlan fluxRebalance(const ClusterState& cluster, const MigrationBudget& budget) {
  cluster.validate();
  const std::size_t n = cluster.nodes.size();
  std::vector<double> sums(n, 0.0);
  std::vector<std::vector<KeyGroupId>> on(n);
  std::map<KeyGroupId, NodeId> assignment = cluster.allocation;
  for (const auto& [g, node] : cluster.allocation) {
    const std::size_t i = cluster.nodeIndex(node);
    sums[i] += cluster.stats.at(g).load;
    on[i].push_back(g);
  }
  auto load = [&](std::size_t i) { return sums[i] * cluster.nodes[i].capacityWeight; };

  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (!cluster.nodes[i].kill) active.push_back(i);
  }

  double spent = 0.0;
  bool moved = true;
  const std::size_t maxPasses = 4 * cluster.stats.size() + 16;
  for (std::size_t pass = 0; moved && pass < maxPasses; ++pass) {
    moved = false;
    std::vector<std::size_t> order = active;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return load(a) > load(b); });
    for (std::size_t p = 0; p < order.size() / 2; ++p) {
      const std::size_t hi = order[p];
      const std::size_t lo = order[order.size() - 1 - p];
      if (!(load(hi) > load(lo))) break;

      // Largest key group first; ids break ties.
      std::vector<KeyGroupId> cands = on[hi];
      std::stable_sort(cands.begin(), cands.end(), [&](KeyGroupId a, KeyGroupId b) {
        return cluster.stats.at(a).load > cluster.stats.at(b).load;
      });
      for (KeyGroupId g : cands) {
        const auto& s = cluster.stats.at(g);
        if (s.load <= 0.0) continue;
        const double cost = budget.costOf(s);
        if (spent + cost > budget.limit) continue;
        const double hiAfter = (sums[hi] - s.load) * cluster.nodes[hi].capacityWeight;
        const double loAfter = (sums[lo] + s.load) * cluster.nodes[lo].capacityWeight;
        if (hiAfter < loAfter) continue;
        sums[hi] -= s.load;
        sums[lo] += s.load;
        on[hi].erase(std::find(on[hi].begin(), on[hi].end(), g));
        on[lo].push_back(g);
        assignment[g] = cluster.nodes[lo].id;
        spent += cost;
        moved = true;
        break;
      }
    }
  }
  return makePlan(cluster, std::move(assignment));
}

}  // namespace reconf

#include <algorithm>
#include <numeric>
#include <set>

#include "reconf/baselines.hpp"
#include "reconf/partition.hpp"
#include "reconf/rng.hpp"
#include "reconf/stats.hpp"

namespace reconf {

namespace {

struct Part {
  std::vector<KeyGroupId> members;
  double load = 0.0;
};

}  // namespace

ColaResult colaSolve(const ClusterState& cluster, const TrafficMatrix& traffic, double maxLD, std::uint64_t seed) {
  cluster.validate();
  if (cluster.activeCount() == 0) throw Error("COLA: every node is marked for removal");
  Rng rng(mixSeed(seed, 0x434f4c41));

  // Node order used to break ties between equally loaded nodes; drawn afresh
  // on every invocation since COLA ignores the current placement.
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < cluster.nodes.size(); ++i) {
    if (!cluster.nodes[i].kill) active.push_back(i);
  }
  rng.shuffle(active);

  auto place = [&](const std::vector<Part>& parts) {
    std::vector<std::size_t> order(parts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (parts[a].load != parts[b].load) return parts[a].load > parts[b].load;
      return parts[a].members.front() < parts[b].members.front();
    });
    std::vector<double> sums(cluster.nodes.size(), 0.0);
    std::map<KeyGroupId, NodeId> assignment;
    for (std::size_t p : order) {
      std::size_t best = active.front();
      for (std::size_t i : active) {
        if (sums[i] * cluster.nodes[i].capacityWeight < sums[best] * cluster.nodes[best].capacityWeight) best = i;
      }
      sums[best] += parts[p].load;
      for (KeyGroupId g : parts[p].members) assignment[g] = cluster.nodes[best].id;
    }
    return assignment;
  };

  std::vector<Part> parts(1);
  for (const auto& [g, s] : cluster.stats) {
    parts[0].members.push_back(g);
    parts[0].load += s.load;
  }
  ColaResult result;
  if (parts[0].members.empty()) {
    result.plan = identityPlan(cluster);
    return result;
  }

  while (true) {
    std::map<KeyGroupId, NodeId> assignment = place(parts);
    ClusterState next = cluster;
    next.allocation = assignment;
    std::size_t heaviest = parts.size();
    for (std::size_t p = 0; p < parts.size(); ++p) {
      if (parts[p].members.size() < 2) continue;
      if (heaviest == parts.size() || parts[p].load > parts[heaviest].load) heaviest = p;
    }
    if (loadDistance(next) <= maxLD || heaviest == parts.size()) {
      result.plan = makePlan(cluster, std::move(assignment));
      result.partitions = parts.size();
      return result;
    }

    WeightedGraph graph;
    const std::set<KeyGroupId> inPart(parts[heaviest].members.begin(), parts[heaviest].members.end());
    for (KeyGroupId g : parts[heaviest].members) graph.addVertex(g, cluster.stats.at(g).load);
    for (KeyGroupId g : parts[heaviest].members) {
      for (auto it = traffic.rates.lower_bound({g, KeyGroupId{0}}); it != traffic.rates.end() && it->first.first == g;
           ++it) {
        if (it->first.second != g && inPart.contains(it->first.second)) graph.addEdge(g, it->first.second, it->second);
      }
    }
    const Partition halves = balancedPartition(graph, 2, 0.10, rng.next());
    std::vector<Part> split(2);
    for (std::size_t h = 0; h < 2; ++h) {
      split[h].members = halves[h];
      for (KeyGroupId g : halves[h]) split[h].load += cluster.stats.at(g).load;
    }
    parts[heaviest] = std::move(split[0]);
    parts.push_back(std::move(split[1]));
    ++result.splits;
  }
}

AllocationPlan sequentialDrainThenBalance(const ClusterState& cluster, const MilpConfig& config) {
  cluster.validate();
  bool bHasGroups = false;
  for (const auto& [g, n] : cluster.allocation) bHasGroups = bHasGroups || cluster.node(n).kill;
  if (!bHasGroups) return solveMilp(cluster, config).plan;

  std::vector<double> sums(cluster.nodes.size(), 0.0);
  for (const auto& [g, n] : cluster.allocation) sums[cluster.nodeIndex(n)] += cluster.stats.at(g).load;
  std::map<KeyGroupId, NodeId> assignment = cluster.allocation;
  double spent = 0.0;
  for (const auto& [g, n] : cluster.allocation) {
    if (!cluster.node(n).kill) continue;
    const auto& s = cluster.stats.at(g);
    const double cost = config.budget.costOf(s);
    if (spent + cost > config.budget.limit) continue;
    std::size_t best = cluster.nodes.size();
    for (std::size_t i = 0; i < cluster.nodes.size(); ++i) {
      if (cluster.nodes[i].kill) continue;
      if (best == cluster.nodes.size() ||
          sums[i] * cluster.nodes[i].capacityWeight < sums[best] * cluster.nodes[best].capacityWeight) {
        best = i;
      }
    }
    if (best == cluster.nodes.size()) throw Error("sequential scale-in: every node is marked for removal");
    sums[cluster.nodeIndex(n)] -= s.load;
    sums[best] += s.load;
    assignment[g] = cluster.nodes[best].id;
    spent += cost;
  }
  return makePlan(cluster, std::move(assignment));
}

}  // namespace reconf

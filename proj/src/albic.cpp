#include "reconf/albic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "reconf/partition.hpp"
#include "reconf/rng.hpp"
#include "reconf/stats.hpp"

namespace reconf {

void AlbicConfig::validate() const {
  if (!(maxLD > 0.0)) throw Error("AlbicConfig: maxLD must be positive");
  if (!(maxPL >= 0.0)) throw Error("AlbicConfig: maxPL must be non-negative");
  if (!(stepPL > 0.0)) throw Error("AlbicConfig: stepPL must be positive");
  if (!(sF > 0.0)) throw Error("AlbicConfig: sF must be positive");
  milp.validate();
}

ScoredPairs scorePairs(const TrafficMatrix& traffic, const ClusterState& cluster, double sF) {
  ScoredPairs out;
  for (const auto& f : qualifyingFlows(cluster, traffic, sF)) {
    const bool together = cluster.allocation.at(f.src) == cluster.allocation.at(f.dst);
    (together ? out.colGrps : out.toBeColGrps).push_back({f.src, f.dst, f.rate, together});
  }
  return out;
}

namespace {

std::size_t partsNeeded(double amount, double bound) {
  if (!std::isfinite(bound)) return 1;
  if (bound <= 0.0) return amount > 0.0 ? SIZE_MAX : 1;
  const double ratio = amount / bound;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 1e-9 * std::max(1.0, ratio))));
}

class Splitter {
 public:
  Splitter(const ClusterState& cluster, const TrafficMatrix& traffic, const AlbicConfig& config)
      : cluster_(cluster), traffic_(traffic), config_(config) {}

  void split(const std::vector<KeyGroupId>& members, std::uint64_t seed,
             std::vector<CollocationPartition>& out) const {
    if (members.size() < 2) return;
    CollocationPartition whole = summarize(members);
    const double budget = config_.milp.budget.limit;
    const std::size_t p1 = partsNeeded(whole.totalMigrCost, budget);
    const std::size_t p2 = partsNeeded(whole.totalLoad, config_.maxPL);
    const std::size_t parts = std::min(std::max(p1, p2), members.size());
    if (parts <= 1) {
      out.push_back(std::move(whole));
      return;
    }

    // Balance whichever quantity is relatively tighter.
    Rng rng(seed);
    const double costShare = std::isfinite(budget) ? (budget > 0.0 ? whole.totalMigrCost / budget : HUGE_VAL) : 0.0;
    const double loadShare = whole.totalLoad / config_.maxPL;
    const bool byCost = costShare == loadShare ? rng.coin() : costShare > loadShare;

    WeightedGraph graph;
    for (KeyGroupId g : members) {
      const auto& s = cluster_.stats.at(g);
      graph.addVertex(g, byCost ? config_.milp.budget.costOf(s) : s.load);
    }
    const std::set<KeyGroupId> inSet(members.begin(), members.end());
    for (KeyGroupId g : members) {
      for (auto it = traffic_.rates.lower_bound({g, KeyGroupId{0}}); it != traffic_.rates.end() && it->first.first == g;
           ++it) {
        if (it->first.second != g && inSet.contains(it->first.second)) graph.addEdge(g, it->first.second, it->second);
      }
    }
    const Partition pieces = balancedPartition(graph, parts, 0.10, rng.next());
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const CollocationPartition piece = summarize(pieces[i]);
      const bool tooBig = piece.totalLoad > config_.maxPL || piece.totalMigrCost > budget;
      if (tooBig && pieces[i].size() > 1 && pieces[i].size() < members.size()) {
        split(pieces[i], mixSeed(seed, i + 1), out);
      } else if (pieces[i].size() > 1) {
        out.push_back(piece);
      }
    }
  }

 private:
  CollocationPartition summarize(const std::vector<KeyGroupId>& members) const {
    CollocationPartition p;
    p.members = members;
    std::sort(p.members.begin(), p.members.end());
    for (KeyGroupId g : p.members) {
      const auto& s = cluster_.stats.at(g);
      p.totalLoad += s.load;
      p.totalMigrCost += config_.milp.budget.costOf(s);
    }
    return p;
  }

  const ClusterState& cluster_;
  const TrafficMatrix& traffic_;
  const AlbicConfig& config_;
};

}  // namespace

std::vector<CollocationPartition> maintainPartitions(const std::vector<PairScore>& colGrps,
                                                     const ClusterState& cluster, const TrafficMatrix& traffic,
                                                     const AlbicConfig& config) {
  std::map<KeyGroupId, KeyGroupId> parent;
  auto find = [&](KeyGroupId g) {
    while (parent.at(g) != g) g = parent[g] = parent[parent[g]];
    return g;
  };
  for (const auto& p : colGrps) {
    parent.try_emplace(p.src, p.src);
    parent.try_emplace(p.dst, p.dst);
    const KeyGroupId a = find(p.src);
    const KeyGroupId b = find(p.dst);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<KeyGroupId, std::vector<KeyGroupId>> sets;
  for (const auto& [g, unused] : parent) sets[find(g)].push_back(g);

  const Splitter splitter(cluster, traffic, config);
  std::vector<CollocationPartition> out;
  for (const auto& [root, members] : sets) {
    splitter.split(members, mixSeed(config.seed, root.value), out);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.members.front() < b.members.front(); });
  return out;
}

std::optional<CollocationConstraint> improveCollocation(const std::vector<PairScore>& toBeColGrps,
                                                        const std::vector<CollocationPartition>& partitions,
                                                        const ClusterState& cluster, std::uint64_t seed) {
  if (toBeColGrps.empty()) return std::nullopt;
  std::map<KeyGroupId, std::size_t> partOf;
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    for (KeyGroupId g : partitions[i].members) partOf[g] = i;
  }
  const auto loads = nodeLoads(cluster);
  auto loadOf = [&](NodeId n) { return loads[cluster.nodeIndex(n)]; };
  auto killed = [&](NodeId n) { return cluster.node(n).kill; };

  std::vector<std::size_t> order(toBeColGrps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return toBeColGrps[a].rate > toBeColGrps[b].rate; });

  for (std::size_t idx : order) {
    const PairScore& pair = toBeColGrps[idx];
    const NodeId n1 = cluster.allocation.at(pair.src);
    const NodeId n2 = cluster.allocation.at(pair.dst);
    const auto p1 = partOf.find(pair.src);
    const auto p2 = partOf.find(pair.dst);
    const bool in1 = p1 != partOf.end();
    const bool in2 = p2 != partOf.end();

    NodeId preferred;
    NodeId other;
    if (in1 != in2) {
      preferred = in1 ? n1 : n2;
      other = in1 ? n2 : n1;
    } else {
      const bool firstLighter = loadOf(n1) <= loadOf(n2);
      preferred = firstLighter ? n1 : n2;
      other = firstLighter ? n2 : n1;
    }
    NodeId target = preferred;
    if (killed(target)) target = other;
    if (killed(target)) continue;

    std::set<KeyGroupId> groups{pair.src, pair.dst};
    if (in1) groups.insert(partitions[p1->second].members.begin(), partitions[p1->second].members.end());
    if (in2) groups.insert(partitions[p2->second].members.begin(), partitions[p2->second].members.end());
    return CollocationConstraint{{groups.begin(), groups.end()}, target};
  }
  return std::nullopt;
}

AlbicResult albicSolve(const ClusterState& cluster, const TrafficMatrix& traffic, const AlbicConfig& config) {
  config.validate();
  const ScoredPairs scores = scorePairs(traffic, cluster, config.sF);
  AlbicResult result;
  double maxPL = config.maxPL;

  while (true) {
    result.finalMaxPL = maxPL;
    if (maxPL <= 0.0) {
      result.solution = solveMilp(cluster, config.milp);
      result.pureMilp = true;
      result.partitions = 0;
      result.constraint.reset();
      return result;
    }
    AlbicConfig current = config;
    current.maxPL = maxPL;
    const auto partitions = maintainPartitions(scores.colGrps, cluster, traffic, current);
    const auto pin = improveCollocation(scores.toBeColGrps, partitions, cluster,
                                        mixSeed(config.seed, 0x5354455033 + result.recursions));
    std::vector<IndivisibleGroup> units;
    for (const auto& p : partitions) units.push_back({p.members});

    std::optional<MilpSolution> sol;
    std::optional<CollocationConstraint> used;
    if (pin) {
      try {
        const CollocationConstraint pins[] = {*pin};
        sol = solveMilp(cluster, config.milp, pins, units);
        used = pin;
      } catch (const InfeasibleError&) {
      }
    }
    if (!sol) {
      try {
        sol = solveMilp(cluster, config.milp, {}, units);
      } catch (const InfeasibleError&) {
      }
    }
    if (sol && loadDistance(applyAssignment(cluster, sol->plan)) <= config.maxLD) {
      result.solution = std::move(*sol);
      result.constraint = used;
      result.partitions = partitions.size();
      return result;
    }
    maxPL -= config.stepPL;
    ++result.recursions;
  }
}

}  // namespace reconf

#include "reconf/core.hpp"

#include <algorithm>

namespace reconf {

bool ClusterState::hasNode(NodeId id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const NodeDescriptor& n, NodeId v) { return n.id < v; });
  return it != nodes.end() && it->id == id;
}

std::size_t ClusterState::nodeIndex(NodeId id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const NodeDescriptor& n, NodeId v) { return n.id < v; });
  if (it == nodes.end() || it->id != id) {
    throw Error("unknown node " + to_string(id));
  }
  return static_cast<std::size_t>(it - nodes.begin());
}

const NodeDescriptor& ClusterState::node(NodeId id) const { return nodes[nodeIndex(id)]; }

NodeDescriptor& ClusterState::node(NodeId id) { return nodes[nodeIndex(id)]; }

std::size_t ClusterState::activeCount() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const NodeDescriptor& n) { return !n.kill; }));
}

std::vector<KeyGroupId> ClusterState::groupsOn(NodeId id) const {
  std::vector<KeyGroupId> out;
  for (const auto& [g, n] : allocation) {
    if (n == id) out.push_back(g);
  }
  return out;
}

void ClusterState::addNode(NodeDescriptor desc) {
  if (hasNode(desc.id)) throw Error("duplicate node " + to_string(desc.id));
  if (!(desc.capacityWeight > 0.0)) throw Error("capacityWeight must be positive");
  auto it = std::lower_bound(nodes.begin(), nodes.end(), desc.id,
                             [](const NodeDescriptor& n, NodeId v) { return n.id < v; });
  nodes.insert(it, desc);
}

void ClusterState::removeNode(NodeId id) {
  for (const auto& [g, n] : allocation) {
    if (n == id) throw Error("cannot remove node " + to_string(id) + ": it still holds key groups");
  }
  nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(nodeIndex(id)));
}

void ClusterState::validate() const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0 && !(nodes[i - 1].id < nodes[i].id)) {
      throw Error("node ids must be unique and ascending");
    }
    if (!(nodes[i].capacityWeight > 0.0)) {
      throw Error("node " + to_string(nodes[i].id) + " has non-positive capacityWeight");
    }
  }
  for (const auto& [g, s] : stats) {
    if (s.id != g) throw Error("stat row id mismatch for key group " + to_string(g));
    if (s.load < 0.0 || s.stateSize < 0.0 || s.migrCost < 0.0) {
      throw Error("negative load, state size or migration cost on key group " + to_string(g));
    }
    auto it = allocation.find(g);
    if (it == allocation.end()) throw Error("key group " + to_string(g) + " is not allocated");
    if (!hasNode(it->second)) {
      throw Error("key group " + to_string(g) + " allocated to unknown node " + to_string(it->second));
    }
  }
  for (const auto& [g, n] : allocation) {
    if (!stats.contains(g)) throw Error("allocation references unknown key group " + to_string(g));
  }
}

double TrafficMatrix::rate(KeyGroupId from, KeyGroupId to) const {
  auto it = rates.find({from, to});
  return it == rates.end() ? 0.0 : it->second;
}

double TrafficMatrix::out(KeyGroupId from) const {
  double sum = 0.0;
  for (auto it = rates.lower_bound({from, KeyGroupId{0}});
       it != rates.end() && it->first.first == from; ++it) {
    sum += it->second;
  }
  return sum;
}

std::vector<double> nodeLoads(const ClusterState& cluster) {
  std::vector<double> sums(cluster.nodes.size(), 0.0);
  for (const auto& [g, n] : cluster.allocation) {
    sums[cluster.nodeIndex(n)] += cluster.stats.at(g).load;
  }
  for (std::size_t i = 0; i < sums.size(); ++i) sums[i] *= cluster.nodes[i].capacityWeight;
  return sums;
}

double nodeLoad(const ClusterState& cluster, NodeId node) {
  const auto& desc = cluster.node(node);
  double sum = 0.0;
  for (const auto& [g, n] : cluster.allocation) {
    if (n == node) sum += cluster.stats.at(g).load;
  }
  return sum * desc.capacityWeight;
}

AllocationPlan makePlan(const ClusterState& cluster, std::map<KeyGroupId, NodeId> assignment) {
  AllocationPlan plan;
  plan.assignment = std::move(assignment);
  for (const auto& [g, from] : cluster.allocation) {
    auto it = plan.assignment.find(g);
    if (it == plan.assignment.end()) throw Error("plan does not assign key group " + to_string(g));
    if (it->second != from) {
      plan.migrations.push_back({g, from, it->second});
      plan.objective.totalMigrCost += cluster.stats.at(g).migrCost;
    }
  }
  if (plan.assignment.size() != cluster.allocation.size()) {
    throw Error("plan assigns key groups unknown to the cluster");
  }
  return plan;
}

AllocationPlan identityPlan(const ClusterState& cluster) { return makePlan(cluster, cluster.allocation); }

ClusterState applyAssignment(const ClusterState& cluster, const AllocationPlan& plan) {
  ClusterState next = cluster;
  for (const auto& [g, n] : plan.assignment) {
    if (!next.hasNode(n)) throw Error("plan references unknown node " + to_string(n));
    auto it = next.allocation.find(g);
    if (it == next.allocation.end()) throw Error("plan references unknown key group " + to_string(g));
    it->second = n;
  }
  return next;
}

std::string to_string(KeyGroupId id) { return "g" + std::to_string(id.value); }
std::string to_string(NodeId id) { return "n" + std::to_string(id.value); }

}  // namespace reconf

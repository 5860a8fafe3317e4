#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace reconf {

template <class Tag>
struct StrongId {
  std::uint32_t value{};

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(StrongId, StrongId) = default;
  friend std::ostream& operator<<(std::ostream& os, StrongId id) { return os << id.value; }
};

using KeyGroupId = StrongId<struct KeyGroupTag>;
using NodeId = StrongId<struct NodeTag>;
using OperatorId = StrongId<struct OperatorTag>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-key-group statistics over the last statistics period.
struct KeyGroupStat {
  KeyGroupId id;
  OperatorId op;
  double load = 0.0;       // percentage points of the bottleneck resource
  double stateSize = 0.0;  // bytes
  double migrCost = 0.0;   // alpha * stateSize

  friend bool operator==(const KeyGroupStat&, const KeyGroupStat&) = default;
};

struct NodeDescriptor {
  NodeId id;
  double capacityWeight = 1.0;
  bool kill = false;  // marked for removal (set B)
};

/// Snapshot of the cluster: nodes, the current key group placement, and the
/// statistics used to plan the next placement.
///
/// Invariants (checked by validate()): node ids unique and ascending, every
/// key group in `stats` is allocated to exactly one existing node, and
/// `allocation` references no unknown key group.
struct ClusterState {
  std::vector<NodeDescriptor> nodes;
  std::map<KeyGroupId, NodeId> allocation;
  std::map<KeyGroupId, KeyGroupStat> stats;

  bool hasNode(NodeId id) const;
  const NodeDescriptor& node(NodeId id) const;
  NodeDescriptor& node(NodeId id);
  std::size_t nodeIndex(NodeId id) const;

  /// Number of nodes not marked for removal (|A|).
  std::size_t activeCount() const;

  std::vector<KeyGroupId> groupsOn(NodeId id) const;

  void addNode(NodeDescriptor node);
  void removeNode(NodeId id);
  void validate() const;
};

/// Sparse group-to-group data rates measured over one statistics period,
/// together with the operator-level stream edges they were measured on.
struct TrafficMatrix {
  std::map<std::pair<KeyGroupId, KeyGroupId>, double> rates;
  std::map<OperatorId, std::set<OperatorId>> downstream;

  double rate(KeyGroupId from, KeyGroupId to) const;
  double out(KeyGroupId from) const;
  bool empty() const { return rates.empty(); }
};

struct Migration {
  KeyGroupId group;
  NodeId from;
  NodeId to;

  friend bool operator==(const Migration&, const Migration&) = default;
};

struct PlanObjective {
  double d = 0.0;
  double du = 0.0;
  double dl = 0.0;
  double totalMigrCost = 0.0;
};

struct AllocationPlan {
  std::map<KeyGroupId, NodeId> assignment;
  std::vector<Migration> migrations;
  PlanObjective objective;
};

/// capacityWeight-scaled sum of key group loads allocated to `node`.
double nodeLoad(const ClusterState& cluster, NodeId node);

/// nodeLoad for every node, aligned with cluster.nodes.
std::vector<double> nodeLoads(const ClusterState& cluster);

/// Builds the migration list and migration cost of moving from the cluster's
/// allocation to `assignment`. Objective deviations are left at zero.
AllocationPlan makePlan(const ClusterState& cluster, std::map<KeyGroupId, NodeId> assignment);

/// Plan that keeps every key group in place.
AllocationPlan identityPlan(const ClusterState& cluster);

/// Copy of `cluster` with the plan's assignment installed.
ClusterState applyAssignment(const ClusterState& cluster, const AllocationPlan& plan);

std::string to_string(KeyGroupId id);
std::string to_string(NodeId id);

}  // namespace reconf

template <class Tag>
struct std::hash<reconf::StrongId<Tag>> {
  std::size_t operator()(reconf::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};

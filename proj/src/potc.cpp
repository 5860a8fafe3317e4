#include <algorithm>

#include "reconf/baselines.hpp"
#include "reconf/rng.hpp"

namespace reconf {

void PotcConfig::validate() const {
  if (keysPerGroup == 0) throw Error("PotcConfig: keysPerGroup must be at least 1");
  if (mergeIntervalTicks < 1) throw Error("PotcConfig: mergeIntervalTicks must be positive");
  if (!(mergeCostFactor >= 0.0)) throw Error("PotcConfig: mergeCostFactor must be non-negative");
}

PotcState::PotcState(PotcConfig config) : config_(config) { config_.validate(); }

NodeId PotcState::h1(std::uint64_t key, const std::vector<NodeId>& live) const {
  if (live.empty()) throw Error("PoTC: no live instance");
  return live[mixSeed(config_.hashSeed ^ key, 1) % live.size()];
}

NodeId PotcState::h2(std::uint64_t key, const std::vector<NodeId>& live) const {
  if (live.empty()) throw Error("PoTC: no live instance");
  return live[mixSeed(config_.hashSeed ^ key, 2) % live.size()];
}

void PotcState::record(std::uint64_t key, NodeId node, double volume) { state_[key][node] += volume; }

std::size_t PotcState::instancesOf(std::uint64_t key) const {
  auto it = state_.find(key);
  return it == state_.end() ? 0 : it->second.size();
}

std::map<NodeId, double> PotcState::splitVolume(const std::vector<NodeId>& live) const {
  std::map<NodeId, double> out;
  for (const auto& [key, where] : state_) {
    if (where.size() < 2) continue;
    const NodeId home = h1(key, live);
    for (const auto& [node, volume] : where) {
      if (node != home) out[home] += volume;
    }
  }
  return out;
}

void PotcState::merge(const std::vector<NodeId>& live) {
  for (auto& [key, where] : state_) {
    if (where.size() < 2) continue;
    double total = 0.0;
    for (const auto& [node, volume] : where) total += volume;
    where.clear();
    where[h1(key, live)] = total;
  }
}

NodeId potcRoute(const PotcState& state, std::uint64_t key, const std::vector<NodeId>& live,
                 const std::map<NodeId, double>& downstreamLoads) {
  const NodeId a = state.h1(key, live);
  const NodeId b = state.h2(key, live);
  if (a == b) return a;
  auto loadOf = [&](NodeId n) {
    auto it = downstreamLoads.find(n);
    return it == downstreamLoads.end() ? 0.0 : it->second;
  };
  return loadOf(b) < loadOf(a) ? b : a;
}

std::map<NodeId, double> potcMergeLoad(const PotcState& state, const ClusterState& cluster) {
  std::vector<NodeId> live;
  for (const auto& n : cluster.nodes) {
    if (!n.kill) live.push_back(n.id);
  }
  std::map<NodeId, double> out;
  for (const auto& [node, volume] : state.splitVolume(live)) out[node] = state.config().mergeCostFactor * volume;
  return out;
}

std::vector<double> potcPeriodLoads(PotcState& state, const ClusterState& cluster, bool mergeTick) {
  std::vector<NodeId> live;
  for (const auto& n : cluster.nodes) {
    if (!n.kill) live.push_back(n.id);
  }
  const std::size_t keys = state.config().keysPerGroup;
  std::map<NodeId, double> routed;
  for (const auto& [g, s] : cluster.stats) {
    const double share = s.load / static_cast<double>(keys);
    for (std::size_t j = 0; j < keys; ++j) {
      const std::uint64_t key = static_cast<std::uint64_t>(g.value) * keys + j;
      const NodeId to = potcRoute(state, key, live, routed);
      routed[to] += share;
      state.record(key, to, share);
    }
  }
  if (mergeTick) {
    for (const auto& [node, extra] : potcMergeLoad(state, cluster)) routed[node] += extra;
    state.merge(live);
  }
  std::vector<double> loads(cluster.nodes.size(), 0.0);
  for (std::size_t i = 0; i < cluster.nodes.size(); ++i) {
    auto it = routed.find(cluster.nodes[i].id);
    if (it != routed.end()) loads[i] = it->second * cluster.nodes[i].capacityWeight;
  }
  return loads;
}

}  // namespace reconf

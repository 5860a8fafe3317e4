#include <algorithm>
#include <cmath>
#include <numeric>

#include "reconf/rng.hpp"
#include "reconf/sim.hpp"
#include "reconf/stats.hpp"

namespace reconf {

std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::FullPartitioning:
      return "fullPartitioning";
    case Pattern::PartialPartitioning:
      return "partialPartitioning";
    case Pattern::PartialMerge:
      return "partialMerge";
    case Pattern::OneToOne:
      return "oneToOne";
  }
  return "oneToOne";
}

std::string to_string(Placement p) {
  switch (p) {
    case Placement::Aligned:
      return "aligned";
    case Placement::WorstCase:
      return "worstCase";
    case Placement::Random:
      return "random";
  }
  return "random";
}

Pattern parsePattern(const std::string& name) {
  for (auto p : {Pattern::FullPartitioning, Pattern::PartialPartitioning, Pattern::PartialMerge, Pattern::OneToOne}) {
    if (to_string(p) == name) return p;
  }
  throw Error("unknown pattern '" + name + "'");
}

Placement parsePlacement(const std::string& name) {
  for (auto p : {Placement::Aligned, Placement::WorstCase, Placement::Random}) {
    if (to_string(p) == name) return p;
  }
  throw Error("unknown placement '" + name + "'");
}

void MigrationLatencyModel::validate() const {
  if (!(secondsPerCostUnit > 0.0)) throw Error("latency.secondsPerCostUnit must be positive");
}

double ScenarioConfig::groupCompute() const {
  return baseNodeLoad * static_cast<double>(nodes) / static_cast<double>(totalGroups());
}

double ScenarioConfig::effectiveCommCost() const {
  return commCost >= 0.0 ? commCost : groupCompute() / dominantRate;
}

void ScenarioConfig::validate() const {
  if (nodes < 1 || keyGroupsPerOperator < 1 || operators < 1) throw Error("nodes, keyGroupsPerOperator and operators must be at least 1");
  if (totalGroups() % nodes != 0) {
    throw Error("keyGroupsPerOperator * operators must be a multiple of nodes so every node gets the same number of key groups");
  }
  if ((placement == Placement::Aligned || placement == Placement::WorstCase) && keyGroupsPerOperator % nodes != 0) {
    throw Error("aligned and worstCase placement need keyGroupsPerOperator to be a multiple of nodes");
  }
  if ((pattern == Pattern::PartialPartitioning || pattern == Pattern::PartialMerge) &&
      (patternDegree < 1 || patternDegree > keyGroupsPerOperator)) {
    throw Error("patternDegree must lie in [1, keyGroupsPerOperator]");
  }
  if (!(collocatablePercent >= 0.0 && collocatablePercent <= 100.0)) throw Error("collocatablePercent must lie in [0, 100]");
  if (!(jitterRange >= 0.0)) throw Error("jitterRange must be non-negative");
  if (!(baseNodeLoad >= 0.0)) throw Error("baseNodeLoad must be non-negative");
  if (!(dominantRate > 0.0)) throw Error("dominantRate must be positive");
  if (!(sF > 0.0)) throw Error("sF must be positive");
  if (killNodes + overloadNodes > nodes || killNodes >= nodes) {
    throw Error("killNodes + overloadNodes must leave at least one ordinary node");
  }
  if (!(alpha > 0.0)) throw Error("alpha must be positive");
  if (splTicks < 1) throw Error("splTicks must be at least 1");
  if (totalTicks < splTicks) throw Error("totalTicks must cover at least one SPL");
  for (const auto& v : variesSchedule) {
    if (v.tick < 0 || v.tick >= totalTicks) throw Error("varies event outside [0, totalTicks)");
  }
  latency.validate();
  if (scaling.enabled) scaling.validate();
}

std::vector<TapeEvent> WorkloadTape::at(int tick) const {
  std::vector<TapeEvent> out;
  for (const auto& e : events) {
    if (e.tick == tick) out.push_back(e);
  }
  return out;
}

namespace {

KeyGroupId groupId(const ScenarioConfig& c, std::size_t op, std::size_t i) {
  return KeyGroupId{static_cast<std::uint32_t>(op * c.keyGroupsPerOperator + i)};
}

TrafficMatrix buildTraffic(const ScenarioConfig& c, Rng& rng) {
  TrafficMatrix t;
  const std::size_t k = c.keyGroupsPerOperator;
  const double r = c.dominantRate;
  for (std::size_t op = 0; op + 1 < c.operators; ++op) {
    t.downstream[OperatorId{static_cast<std::uint32_t>(op)}].insert(OperatorId{static_cast<std::uint32_t>(op + 1)});
    std::vector<bool> dominant(k, false);
    if (c.pattern == Pattern::OneToOne) {
      std::vector<std::size_t> idx(k);
      std::iota(idx.begin(), idx.end(), 0);
      rng.shuffle(idx);
      const auto count = static_cast<std::size_t>(std::llround(c.collocatablePercent / 100.0 * static_cast<double>(k)));
      for (std::size_t j = 0; j < count; ++j) dominant[idx[j]] = true;
    }
    for (std::size_t i = 0; i < k; ++i) {
      const KeyGroupId src = groupId(c, op, i);
      auto send = [&](std::size_t j, double rate) { t.rates[{src, groupId(c, op + 1, j)}] += rate; };
      switch (c.pattern) {
        case Pattern::FullPartitioning:
          for (std::size_t j = 0; j < k; ++j) send(j, r / static_cast<double>(k));
          break;
        case Pattern::PartialPartitioning:
          for (std::size_t m = 0; m < c.patternDegree; ++m) send((i + m) % k, r / static_cast<double>(c.patternDegree));
          break;
        case Pattern::PartialMerge:
          send(i / c.patternDegree, r);
          break;
        case Pattern::OneToOne:
          if (dominant[i]) {
            send(i, r);
          } else {
            for (std::size_t j = 0; j < k; ++j) send(j, r / static_cast<double>(k));
          }
          break;
      }
    }
  }
  return t;
}

std::vector<std::size_t> placement(const ScenarioConfig& c, Rng& rng) {
  const std::size_t k = c.keyGroupsPerOperator;
  std::vector<std::size_t> node(c.totalGroups());
  switch (c.placement) {
    case Placement::Aligned:
      for (std::size_t op = 0; op < c.operators; ++op) {
        for (std::size_t i = 0; i < k; ++i) node[op * k + i] = i % c.nodes;
      }
      break;
    case Placement::WorstCase:
      for (std::size_t op = 0; op < c.operators; ++op) {
        for (std::size_t i = 0; i < k; ++i) node[op * k + i] = (i + op) % c.nodes;
      }
      break;
    case Placement::Random: {
      for (std::size_t g = 0; g < node.size(); ++g) node[g] = g % c.nodes;
      rng.shuffle(node);
      break;
    }
  }
  return node;
}

// Nodes affected by a varies or jitter event: 20% of the nodes, at least one.
std::vector<std::uint32_t> pickNodes(std::size_t nodes, Rng& rng) {
  std::vector<std::uint32_t> ids(nodes);
  std::iota(ids.begin(), ids.end(), 0u);
  rng.shuffle(ids);
  const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(nodes))));
  ids.resize(std::min(count, nodes));
  return ids;
}

}  // namespace

ClusterState withCommunicationLoad(const ClusterState& computeView, const TrafficMatrix& traffic, double commCost,
                                   double sF) {
  ClusterState out = computeView;
  if (commCost <= 0.0) return out;
  for (const auto& f : qualifyingFlows(computeView, traffic, sF)) {
    if (computeView.allocation.at(f.src) == computeView.allocation.at(f.dst)) continue;
    out.stats.at(f.src).load += commCost * f.rate;
    out.stats.at(f.dst).load += commCost * f.rate;
  }
  return out;
}

ClusterState stepWorkload(const WorkloadTape& tape, int tick, const ClusterState& cluster) {
  ClusterState out = cluster;
  for (const auto& e : tape.events) {
    if (e.tick != tick) continue;
    if (!e.isNode) {
      auto it = out.stats.find(KeyGroupId{e.id});
      if (it != out.stats.end()) it->second.load = std::max(0.0, it->second.load + e.delta);
      continue;
    }
    const NodeId node{e.id};
    if (!out.hasNode(node)) continue;
    std::vector<KeyGroupId> groups = out.groupsOn(node);
    if (groups.empty()) continue;
    Rng rng(mixSeed(static_cast<std::uint64_t>(tick) << 32 | e.id, 0x5350524541));
    rng.shuffle(groups);
    groups.resize(std::max<std::size_t>(1, groups.size() / 2));
    std::sort(groups.begin(), groups.end());
    const double share = e.delta / static_cast<double>(groups.size());
    for (KeyGroupId g : groups) {
      auto& s = out.stats.at(g);
      s.load = std::max(0.0, s.load + share);
    }
  }
  return out;
}

GeneratedScenario generateScenario(const ScenarioConfig& config) {
  config.validate();
  Rng rng(mixSeed(config.seed, 0x47454e));
  GeneratedScenario out;
  for (std::size_t i = 0; i < config.nodes; ++i) out.computeView.addNode({NodeId{static_cast<std::uint32_t>(i)}, 1.0, false});

  Rng trafficRng(rng.next());
  out.traffic = buildTraffic(config, trafficRng);

  Rng placeRng(rng.next());
  const auto where = placement(config, placeRng);
  const double base = config.groupCompute();
  Rng loadRng(rng.next());
  for (std::size_t op = 0; op < config.operators; ++op) {
    for (std::size_t i = 0; i < config.keyGroupsPerOperator; ++i) {
      const KeyGroupId g = groupId(config, op, i);
      const double kb = loadRng.uniform(256.0, 768.0);
      KeyGroupStat s;
      s.id = g;
      s.op = OperatorId{static_cast<std::uint32_t>(op)};
      s.load = base * (1.0 + loadRng.uniform(-0.05, 0.05));
      s.stateSize = kb * 1024.0;
      s.migrCost = config.alpha * kb;
      out.computeView.stats.emplace(g, s);
      out.computeView.allocation.emplace(g, NodeId{static_cast<std::uint32_t>(where[op * config.keyGroupsPerOperator + i])});
    }
  }

  // Removal and overload roles go to distinct random nodes.
  Rng roleRng(rng.next());
  std::vector<std::uint32_t> roles(config.nodes);
  std::iota(roles.begin(), roles.end(), 0u);
  roleRng.shuffle(roles);
  for (std::size_t j = 0; j < config.killNodes; ++j) out.computeView.node(NodeId{roles[j]}).kill = true;
  for (std::size_t j = config.killNodes; j < config.killNodes + config.overloadNodes; ++j) {
    const NodeId n{roles[j]};
    double sum = 0.0;
    for (KeyGroupId g : out.computeView.groupsOn(n)) sum += out.computeView.stats.at(g).load;
    if (sum <= 0.0) continue;
    const double factor = config.overloadLoad / sum;
    for (KeyGroupId g : out.computeView.groupsOn(n)) out.computeView.stats.at(g).load *= factor;
  }

  Rng tapeRng(rng.next());
  for (const auto& v : config.variesSchedule) {
    const auto picked = pickNodes(config.nodes, tapeRng);
    const std::size_t down = picked.size() / 2;
    for (std::size_t j = 0; j < picked.size(); ++j) {
      out.tape.events.push_back({v.tick, true, picked[j], (j < down ? -0.5 : 0.5) * v.varies});
    }
  }
  if (config.jitterRange > 0.0) {
    for (int t = config.splTicks; t < config.totalTicks; t += config.splTicks) {
      for (std::uint32_t n : pickNodes(config.nodes, tapeRng)) {
        out.tape.events.push_back({t, true, n, tapeRng.uniform(-config.jitterRange, config.jitterRange)});
      }
    }
  }
  std::stable_sort(out.tape.events.begin(), out.tape.events.end(),
                   [](const TapeEvent& a, const TapeEvent& b) { return a.tick < b.tick; });

  out.computeView = stepWorkload(out.tape, 0, out.computeView);
  out.cluster = withCommunicationLoad(out.computeView, out.traffic, config.effectiveCommCost(), config.sF);
  return out;
}

}  // namespace reconf

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "reconf/milp.hpp"
#include "reconf/stats.hpp"

namespace reconf {

double MigrationBudget::spent(const ClusterState& cluster, const AllocationPlan& plan) const {
  double total = 0.0;
  for (const auto& m : plan.migrations) total += costOf(cluster.stats.at(m.group));
  return total;
}

void MilpConfig::validate() const {
  if (!(w1 > 0.0) || !(w2 > 0.0)) throw Error("MilpConfig: weights must be positive");
  if (w1 < 100.0 * w2) throw Error("MilpConfig: w1 must be at least 100 * w2");
  if (!(wB >= 0.0)) throw Error("MilpConfig: wB must be non-negative");
  if (!(budget.limit >= 0.0)) throw Error("MilpConfig: migration budget must be non-negative");
  if (!(timeLimit > 0.0)) throw Error("MilpConfig: timeLimit must be positive");
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

std::size_t groupIndex(const MilpModel& model, KeyGroupId g) {
  auto it = std::lower_bound(model.groups.begin(), model.groups.end(), g);
  if (it == model.groups.end() || *it != g) throw Error("constraint references unknown key group " + to_string(g));
  return static_cast<std::size_t>(it - model.groups.begin());
}

std::size_t nodeIndexOf(const MilpModel& model, NodeId n) {
  auto it = std::lower_bound(model.nodes.begin(), model.nodes.end(), n);
  if (it == model.nodes.end() || *it != n) throw Error("constraint references unknown node " + to_string(n));
  return static_cast<std::size_t>(it - model.nodes.begin());
}

}  // namespace

MilpModel buildModel(const ClusterState& cluster, const MilpConfig& config,
                     std::span<const CollocationConstraint> pins,
                     std::span<const IndivisibleGroup> indivisible) {
  config.validate();
  cluster.validate();
  if (cluster.activeCount() == 0) throw Error("buildModel: every node is marked for removal");

  MilpModel model;
  model.config = config;
  for (const auto& n : cluster.nodes) {
    model.nodes.push_back(n.id);
    model.capacity.push_back(n.capacityWeight);
    model.kill.push_back(n.kill);
  }
  for (const auto& [g, s] : cluster.stats) {
    model.groups.push_back(g);
    model.gLoad.push_back(s.load);
    model.migrCost.push_back(config.budget.costOf(s));
    model.current.push_back(cluster.nodeIndex(cluster.allocation.at(g)));
  }
  model.mean = meanLoad(cluster);
  model.pins.assign(pins.begin(), pins.end());
  model.indivisible.assign(indivisible.begin(), indivisible.end());

  const std::size_t n = model.groups.size();
  DisjointSets sets(n);
  for (const auto& ind : model.indivisible) {
    for (std::size_t i = 1; i < ind.members.size(); ++i) {
      sets.unite(groupIndex(model, ind.members[0]), groupIndex(model, ind.members[i]));
    }
    if (ind.members.size() == 1) groupIndex(model, ind.members[0]);
  }
  std::vector<std::optional<std::size_t>> groupTarget(n);
  for (const auto& pin : model.pins) {
    const std::size_t target = nodeIndexOf(model, pin.targetNode);
    for (std::size_t i = 0; i < pin.groups.size(); ++i) {
      const std::size_t k = groupIndex(model, pin.groups[i]);
      if (groupTarget[k] && *groupTarget[k] != target) {
        throw InfeasibleError("key group " + to_string(pin.groups[i]) + " pinned to two different nodes",
                              std::numeric_limits<double>::infinity());
      }
      groupTarget[k] = target;
      if (i > 0) sets.unite(groupIndex(model, pin.groups[0]), k);
    }
  }

  std::vector<std::size_t> unitOfRoot(n, SIZE_MAX);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t root = sets.find(k);
    if (unitOfRoot[root] == SIZE_MAX) {
      unitOfRoot[root] = model.units.size();
      model.units.emplace_back();
      model.unitTarget.emplace_back();
    }
    const std::size_t u = unitOfRoot[root];
    model.units[u].push_back(k);
    if (groupTarget[k]) {
      if (model.unitTarget[u] && *model.unitTarget[u] != *groupTarget[k]) {
        throw InfeasibleError("indivisible key groups pinned to different nodes",
                              std::numeric_limits<double>::infinity());
      }
      model.unitTarget[u] = groupTarget[k];
    }
  }
  for (std::size_t u = 0; u < model.units.size(); ++u) {
    if (!model.unitTarget[u] || !model.kill[*model.unitTarget[u]]) continue;
    for (std::size_t k : model.units[u]) {
      if (model.current[k] != *model.unitTarget[u]) {
        throw InfeasibleError("key group " + to_string(model.groups[k]) + " pinned into a node marked for removal",
                              std::numeric_limits<double>::infinity());
      }
    }
  }
  return model;
}

std::size_t MilpModel::activeCount() const {
  return static_cast<std::size_t>(std::count(kill.begin(), kill.end(), false));
}

std::size_t MilpModel::constraintCount(ConstraintKind kind) const {
  switch (kind) {
    case ConstraintKind::Assignment:
      return groups.size();
    case ConstraintKind::Budget:
      return config.budget.isUnbounded() ? 0 : 1;
    case ConstraintKind::UpperLoad:
      return nodes.size();
    case ConstraintKind::LowerLoad:
      return activeCount();
    case ConstraintKind::MeanFloor:
      return 1;
    case ConstraintKind::Indivisible: {
      std::size_t rows = 0;
      for (const auto& ind : indivisible) {
        if (!ind.members.empty()) rows += (ind.members.size() - 1) * nodes.size();
      }
      return rows;
    }
    case ConstraintKind::Pin: {
      std::size_t rows = 0;
      for (const auto& p : pins) rows += p.groups.size();
      return rows;
    }
    case ConstraintKind::NoInflow: {
      std::size_t rows = 0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!kill[i]) continue;
        for (std::size_t c : current) rows += c == i ? 0 : 1;
      }
      return rows;
    }
  }
  return 0;
}

ModelEvaluation evaluate(const MilpModel& model, std::span<const std::size_t> nodeOfGroup) {
  if (nodeOfGroup.size() != model.groups.size()) throw Error("evaluate: assignment size mismatch");
  const std::size_t nn = model.nodes.size();
  std::vector<double> sums(nn, 0.0);
  ModelEvaluation ev;
  for (std::size_t k = 0; k < nodeOfGroup.size(); ++k) {
    sums[nodeOfGroup[k]] += model.gLoad[k];
    if (nodeOfGroup[k] != model.current[k]) ev.migrCost += model.migrCost[k];
  }
  bool inflow = false;
  for (std::size_t k = 0; k < nodeOfGroup.size(); ++k) {
    inflow = inflow || (model.kill[nodeOfGroup[k]] && nodeOfGroup[k] != model.current[k]);
  }
  double maxL = -std::numeric_limits<double>::infinity();
  double minA = std::numeric_limits<double>::infinity();
  double costB = 0.0;
  for (std::size_t k = 0; k < nodeOfGroup.size(); ++k) {
    if (model.kill[nodeOfGroup[k]]) costB += model.migrCost[k];
  }
  for (std::size_t i = 0; i < nn; ++i) {
    const double load = sums[i] * model.capacity[i];
    maxL = std::max(maxL, load);
    if (!model.kill[i]) minA = std::min(minA, load);
  }
  ev.d = std::max(maxL - model.mean, model.mean - minA);
  ev.du = ev.d - (maxL - model.mean);
  ev.dl = ev.d - (model.mean - minA);
  ev.costB = costB;
  ev.objective = model.config.w1 * ev.d + model.config.wB * costB - model.config.w2 * (ev.du + ev.dl);

  bool ok = !inflow && ev.migrCost <= model.config.budget.limit && model.mean - ev.d >= 0.0;
  for (std::size_t u = 0; ok && u < model.units.size(); ++u) {
    const auto& members = model.units[u];
    const std::size_t at = nodeOfGroup[members.front()];
    if (model.unitTarget[u] && at != *model.unitTarget[u]) ok = false;
    for (std::size_t k : members) ok = ok && nodeOfGroup[k] == at;
  }
  ev.feasible = ok;
  return ev;
}

std::string MilpModel::toLpFormat() const {
  std::ostringstream os;
  os.precision(12);
  auto x = [&](std::size_t i, std::size_t k) {
    return "x_" + to_string(nodes[i]) + "_" + to_string(groups[k]);
  };
  os << "\\ key group allocation: " << nodes.size() << " nodes, " << groups.size()
     << " key groups, mean = " << mean << "\n";
  os << "Minimize\n obj: " << config.w1 << " d - " << config.w2 << " du - " << config.w2 << " dl";
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (!kill[current[k]] || config.wB == 0.0) continue;
    os << " + " << config.wB * migrCost[k] << " " << x(current[k], k);
  }
  os << "\n";
  os << "Subject To\n";
  for (std::size_t k = 0; k < groups.size(); ++k) {
    os << " assign_" << to_string(groups[k]) << ":";
    for (std::size_t i = 0; i < nodes.size(); ++i) os << (i ? " + " : " ") << x(i, k);
    os << " = 1\n";
  }
  if (!config.budget.isUnbounded()) {
    os << " budget:";
    bool first = true;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (i == current[k]) continue;
        os << (first ? " " : " + ") << migrCost[k] << " " << x(i, k);
        first = false;
      }
    }
    if (first) os << " 0 d";
    os << " <= " << config.budget.limit << "\n";
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    os << " upper_" << to_string(nodes[i]) << ":";
    for (std::size_t k = 0; k < groups.size(); ++k) os << " + " << gLoad[k] * capacity[i] << " " << x(i, k);
    os << " - d + du <= " << mean << "\n";
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (kill[i]) continue;
    os << " lower_" << to_string(nodes[i]) << ":";
    for (std::size_t k = 0; k < groups.size(); ++k) os << " + " << gLoad[k] * capacity[i] << " " << x(i, k);
    os << " + d - dl >= " << mean << "\n";
  }
  os << " floor: d <= " << mean << "\n";
  std::size_t row = 0;
  for (const auto& ind : indivisible) {
    for (std::size_t m = 1; m < ind.members.size(); ++m) {
      const std::size_t a = std::lower_bound(groups.begin(), groups.end(), ind.members[0]) - groups.begin();
      const std::size_t b = std::lower_bound(groups.begin(), groups.end(), ind.members[m]) - groups.begin();
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        os << " link_" << row++ << ": " << x(i, a) << " - " << x(i, b) << " = 0\n";
      }
    }
  }
  row = 0;
  for (const auto& pin : pins) {
    const std::size_t i = std::lower_bound(nodes.begin(), nodes.end(), pin.targetNode) - nodes.begin();
    for (KeyGroupId g : pin.groups) {
      const std::size_t k = std::lower_bound(groups.begin(), groups.end(), g) - groups.begin();
      os << " pin_" << row++ << ": " << x(i, k) << " = 1\n";
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!kill[i]) continue;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      if (current[k] != i) os << " noinflow_" << to_string(nodes[i]) << "_" << to_string(groups[k]) << ": " << x(i, k) << " = 0\n";
    }
  }
  os << "Bounds\n d free\n du >= 0\n dl >= 0\nBinary\n";
  for (std::size_t k = 0; k < groups.size(); ++k) {
    for (std::size_t i = 0; i < nodes.size(); ++i) os << " " << x(i, k) << "\n";
  }
  os << "End\n";
  return os.str();
}

MilpSolution solveMilp(const ClusterState& cluster, const MilpConfig& config,
                       std::span<const CollocationConstraint> pins,
                       std::span<const IndivisibleGroup> indivisible) {
  return solve(buildModel(cluster, config, pins, indivisible));
}

}  // namespace reconf

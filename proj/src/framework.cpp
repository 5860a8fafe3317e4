#include "reconf/framework.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "reconf/rng.hpp"
#include "reconf/stats.hpp"

namespace reconf {

void ScalingPolicy::validate() const {
  if (!(scaleInThreshold < targetUtilization && targetUtilization < scaleOutThreshold)) {
    throw Error("ScalingPolicy: need scaleInThreshold < targetUtilization < scaleOutThreshold");
  }
  if (minNodes < 1) throw Error("ScalingPolicy: minNodes must be at least 1");
  if (!(maxLD > 0.0)) throw Error("ScalingPolicy: maxLD must be positive");
}

std::string to_string(ScalingAction::Kind kind) {
  switch (kind) {
    case ScalingAction::Kind::None:
      return "none";
    case ScalingAction::Kind::ScaleOut:
      return "scale_out";
    case ScalingAction::Kind::ScaleIn:
      return "scale_in";
  }
  return "none";
}

ScalingAction scalingDecision(const AllocationPlan& projected, const ClusterState& cluster,
                              const ScalingPolicy& policy, const MilpConfig& probeConfig) {
  ScalingAction action;
  if (!policy.enabled) return action;
  policy.validate();

  const ClusterState next = applyAssignment(cluster, projected);
  const auto loads = nodeLoads(next);
  const std::size_t active = next.activeCount();
  if (active == 0) return action;
  double total = 0.0;
  for (double l : loads) total += l;
  double demand = 0.0;
  for (const auto& [g, s] : next.stats) demand += s.load;
  const double mean = total / static_cast<double>(active);
  const auto needed = static_cast<std::size_t>(std::max(1.0, std::ceil(demand / policy.targetUtilization - 1e-9)));

  if (mean > policy.scaleOutThreshold) {
    if (needed > active) {
      action.kind = ScalingAction::Kind::ScaleOut;
      action.add = needed - active;
    }
    return action;
  }
  if (mean >= policy.scaleInThreshold) return action;

  const std::size_t keep = std::max(policy.minNodes, needed);
  if (keep >= active) return action;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < next.nodes.size(); ++i) {
    if (!next.nodes[i].kill) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return loads[a] < loads[b]; });

  MilpConfig probe = probeConfig;
  probe.budget = MigrationBudget::unbounded();
  for (std::size_t k = active - keep; k >= 1; --k) {
    ClusterState trial = next;
    std::vector<NodeId> remove;
    for (std::size_t j = 0; j < k; ++j) {
      trial.nodes[candidates[j]].kill = true;
      remove.push_back(trial.nodes[candidates[j]].id);
    }
    try {
      const MilpSolution sol = solveMilp(trial, probe);
      if (loadDistance(applyAssignment(trial, sol.plan)) <= policy.maxLD) {
        std::sort(remove.begin(), remove.end());
        action.kind = ScalingAction::Kind::ScaleIn;
        action.remove = std::move(remove);
        return action;
      }
    } catch (const InfeasibleError&) {
    }
  }
  return action;
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Milp:
      return "milp";
    case OptimizerKind::Albic:
      return "albic";
    case OptimizerKind::Flux:
      return "flux";
    case OptimizerKind::Potc:
      return "potc";
    case OptimizerKind::Cola:
      return "cola";
    case OptimizerKind::Sequential:
      return "sequential";
  }
  return "milp";
}

OptimizerKind parseOptimizerKind(const std::string& name) {
  for (auto k : {OptimizerKind::Milp, OptimizerKind::Albic, OptimizerKind::Flux, OptimizerKind::Potc,
                 OptimizerKind::Cola, OptimizerKind::Sequential}) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown optimizer '" + name + "' (expected milp, albic, flux, potc, cola or sequential)");
}

namespace {

class MilpOptimizer : public Optimizer {
 public:
  explicit MilpOptimizer(MilpConfig config) : config_(config) {}
  std::string name() const override { return "milp"; }
  AllocationPlan plan(const ClusterState& cluster, const TrafficMatrix&, std::uint64_t roundSeed) override {
    MilpConfig cfg = config_;
    cfg.seed = mixSeed(config_.seed, roundSeed);
    return solveMilp(cluster, cfg).plan;
  }
  MigrationBudget budget() const override { return config_.budget; }

 private:
  MilpConfig config_;
};

class AlbicOptimizer : public Optimizer {
 public:
  explicit AlbicOptimizer(AlbicConfig config) : config_(config) {}
  std::string name() const override { return "albic"; }
  AllocationPlan plan(const ClusterState& cluster, const TrafficMatrix& traffic, std::uint64_t roundSeed) override {
    AlbicConfig cfg = config_;
    cfg.seed = mixSeed(config_.seed, roundSeed);
    cfg.milp.seed = mixSeed(config_.milp.seed, roundSeed);
    return albic(cluster, traffic, cfg);
  }
  MigrationBudget budget() const override { return config_.milp.budget; }

 private:
  AlbicConfig config_;
};

class FluxOptimizer : public Optimizer {
 public:
  explicit FluxOptimizer(MigrationBudget budget) : budget_(budget) {}
  std::string name() const override { return "flux"; }
  AllocationPlan plan(const ClusterState& cluster, const TrafficMatrix&, std::uint64_t) override {
    return fluxRebalance(cluster, budget_);
  }
  MigrationBudget budget() const override { return budget_; }

 private:
  MigrationBudget budget_;
};

class PotcOptimizer : public Optimizer {
 public:
  explicit PotcOptimizer(PotcConfig config) : state_(config) {}
  std::string name() const override { return "potc"; }

  // Key groups are not owned by nodes under PoTC; only those on nodes being
  // removed are handed to their first-choice instance.
  AllocationPlan plan(const ClusterState& cluster, const TrafficMatrix&, std::uint64_t) override {
    std::vector<NodeId> live;
    for (const auto& n : cluster.nodes) {
      if (!n.kill) live.push_back(n.id);
    }
    auto assignment = cluster.allocation;
    for (auto& [g, n] : assignment) {
      if (cluster.node(n).kill) n = state_.h1(static_cast<std::uint64_t>(g.value) * state_.config().keysPerGroup, live);
    }
    return makePlan(cluster, std::move(assignment));
  }

  std::vector<double> observedLoads(const ClusterState& cluster, int tick) override {
    return potcPeriodLoads(state_, cluster, tick % state_.config().mergeIntervalTicks == 0);
  }

 private:
  PotcState state_;
};

class ColaOptimizer : public Optimizer {
 public:
  ColaOptimizer(double maxLD, std::uint64_t seed) : maxLD_(maxLD), seed_(seed) {}
  std::string name() const override { return "cola"; }
  AllocationPlan plan(const ClusterState& cluster, const TrafficMatrix& traffic, std::uint64_t roundSeed) override {
    return colaAllocate(cluster, traffic, maxLD_, mixSeed(seed_, roundSeed));
  }

 private:
  double maxLD_;
  std::uint64_t seed_;
};

class SequentialOptimizer : public Optimizer {
 public:
  explicit SequentialOptimizer(MilpConfig config) : config_(config) {}
  std::string name() const override { return "sequential"; }
  AllocationPlan plan(const ClusterState& cluster, const TrafficMatrix&, std::uint64_t roundSeed) override {
    MilpConfig cfg = config_;
    cfg.seed = mixSeed(config_.seed, roundSeed);
    return sequentialDrainThenBalance(cluster, cfg);
  }
  MigrationBudget budget() const override { return config_.budget; }

 private:
  MilpConfig config_;
};

}  // namespace

std::unique_ptr<Optimizer> makeOptimizer(const OptimizerSettings& settings) {
  settings.milp.validate();
  switch (settings.kind) {
    case OptimizerKind::Milp:
      return std::make_unique<MilpOptimizer>(settings.milp);
    case OptimizerKind::Albic: {
      AlbicConfig cfg = settings.albic;
      cfg.milp = settings.milp;
      cfg.validate();
      return std::make_unique<AlbicOptimizer>(cfg);
    }
    case OptimizerKind::Flux:
      return std::make_unique<FluxOptimizer>(settings.milp.budget);
    case OptimizerKind::Potc:
      return std::make_unique<PotcOptimizer>(settings.potc);
    case OptimizerKind::Cola:
      return std::make_unique<ColaOptimizer>(settings.colaMaxLD, settings.milp.seed);
    case OptimizerKind::Sequential:
      return std::make_unique<SequentialOptimizer>(settings.milp);
  }
  throw Error("unknown optimizer kind");
}

RoundResult adaptationRound(const ClusterState& cluster, const TrafficMatrix& traffic, Optimizer& optimizer,
                            const ScalingPolicy& policy, std::uint64_t roundSeed) {
  RoundResult result;
  result.cluster = cluster;
  const auto start = std::chrono::steady_clock::now();
  try {
    ClusterState current = cluster;
    std::vector<NodeId> emptied;
    for (const auto& n : current.nodes) {
      if (n.kill && current.groupsOn(n.id).empty()) emptied.push_back(n.id);
    }
    for (NodeId id : emptied) current.removeNode(id);
    result.report.removedNodes = emptied;

    AllocationPlan plan = optimizer.plan(current, traffic, roundSeed);

    MilpConfig probe;
    probe.seed = roundSeed;
    const ScalingAction action = scalingDecision(plan, current, policy, probe);
    if (action.kind == ScalingAction::Kind::ScaleOut) {
      std::uint32_t next = current.nodes.empty() ? 0 : current.nodes.back().id.value + 1;
      for (std::size_t i = 0; i < action.add; ++i) current.addNode({NodeId{next++}, 1.0, false});
    } else if (action.kind == ScalingAction::Kind::ScaleIn) {
      for (NodeId id : action.remove) current.node(id).kill = true;
    }
    if (action.kind != ScalingAction::Kind::None) {
      plan = optimizer.plan(current, traffic, mixSeed(roundSeed, 1));
    }

    const double spent = optimizer.budget().spent(current, plan);
    if (spent > optimizer.budget().limit) {
      throw Error(optimizer.name() + " exceeded its migration budget");
    }
    result.cluster = applyAssignment(current, plan);
    result.report.scaling = action;
    result.report.plan = std::move(plan);
    result.report.budgetSpent = spent;
  } catch (const std::exception& e) {
    result.cluster = cluster;
    result.report = RoundReport{};
    result.report.plan = identityPlan(cluster);
    result.report.error = e.what();
  }
  result.report.solveTime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace reconf

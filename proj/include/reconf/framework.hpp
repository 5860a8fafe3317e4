#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reconf/albic.hpp"
#include "reconf/baselines.hpp"
#include "reconf/core.hpp"
#include "reconf/milp.hpp"

namespace reconf {

struct ScalingPolicy {
  bool enabled = true;
  double targetUtilization = 70.0;
  double scaleOutThreshold = 85.0;
  double scaleInThreshold = 40.0;
  std::size_t minNodes = 1;
  double maxLD = 10.0;  // the scale-in probe must reach this load distance

  void validate() const;
};

struct ScalingAction {
  enum class Kind { None, ScaleOut, ScaleIn };
  Kind kind = Kind::None;
  std::size_t add = 0;
  std::vector<NodeId> remove;
};

std::string to_string(ScalingAction::Kind kind);

/// Threshold policy evaluated on the projected loads of `projected`.
ScalingAction scalingDecision(const AllocationPlan& projected, const ClusterState& cluster,
                              const ScalingPolicy& policy, const MilpConfig& probeConfig = {});

enum class OptimizerKind { Milp, Albic, Flux, Potc, Cola, Sequential };

std::string to_string(OptimizerKind kind);
OptimizerKind parseOptimizerKind(const std::string& name);

/// Settings for every optimizer kind; each kind reads the fields it needs. The
/// migration budget lives in milp.budget and is shared by all budgeted kinds.
struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::Milp;
  MilpConfig milp;
  AlbicConfig albic;  // albic.milp is replaced by `milp`
  PotcConfig potc;
  double colaMaxLD = 10.0;
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual std::string name() const = 0;

  /// Next allocation. `roundSeed` varies per round so that randomized tie-breaks differ.
  virtual AllocationPlan plan(const ClusterState& cluster, const TrafficMatrix& traffic, std::uint64_t roundSeed) = 0;

  /// Node loads as they appear to metrics, aligned with cluster.nodes. Only
  /// optimizers that reroute work themselves (PoTC) differ from nodeLoads().
  virtual std::vector<double> observedLoads(const ClusterState& cluster, int tick) {
    (void)tick;
    return nodeLoads(cluster);
  }

  /// Migration budget honoured by plan(); unbounded for optimizers without one.
  virtual MigrationBudget budget() const { return MigrationBudget::unbounded(); }
};

std::unique_ptr<Optimizer> makeOptimizer(const OptimizerSettings& settings);

struct RoundReport {
  std::vector<NodeId> removedNodes;
  ScalingAction scaling;
  AllocationPlan plan;
  double budgetSpent = 0.0;  // in the optimizer's budget units
  double solveTime = 0.0;
  std::optional<std::string> error;
};

struct RoundResult {
  ClusterState cluster;
  RoundReport report;
};

/// One adaptation round: drop empty B nodes, plan, decide scaling on the
/// projected loads, re-plan if scaling changed the cluster, apply.
RoundResult adaptationRound(const ClusterState& cluster, const TrafficMatrix& traffic, Optimizer& optimizer,
                            const ScalingPolicy& policy, std::uint64_t roundSeed);

}  // namespace reconf

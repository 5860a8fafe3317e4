#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reconf/core.hpp"
#include "reconf/framework.hpp"

namespace reconf {

enum class Pattern { FullPartitioning, PartialPartitioning, PartialMerge, OneToOne };
enum class Placement { Aligned, WorstCase, Random };

std::string to_string(Pattern p);
std::string to_string(Placement p);
Pattern parsePattern(const std::string& name);
Placement parsePlacement(const std::string& name);

struct VariesEvent {
  int tick = 0;
  double varies = 0.0;
};

struct MigrationLatencyModel {
  double secondsPerCostUnit = 2.5 / 512.0;  // a 512 KB key group pauses for 2.5 s
  bool pausedWhileMigrating = true;

  void validate() const;
};

struct ScenarioConfig {
  std::size_t nodes = 20;
  std::size_t keyGroupsPerOperator = 40;
  std::size_t operators = 10;
  Pattern pattern = Pattern::OneToOne;
  std::size_t patternDegree = 2;       // fan-out of partial partitioning, fan-in of partial merge
  double collocatablePercent = 100.0;  // share of one-to-one groups with a dominant partner
  std::vector<VariesEvent> variesSchedule;
  double jitterRange = 0.0;  // +- load points on 20% of the nodes every SPL
  double baseNodeLoad = 50.0;  // compute load per node before adjustments
  double dominantRate = 100.0;  // tuples/s leaving each upstream key group
  double commCost = -1.0;       // load points per remote tuple/s; negative picks the calibrated default
  double sF = 1.5;
  Placement placement = Placement::Random;
  std::size_t killNodes = 0;       // marked for removal after initialization
  std::size_t overloadNodes = 0;
  double overloadLoad = 100.0;     // compute load of each overloaded node
  double alpha = 1.0;              // migration cost per KB of state
  OptimizerSettings optimizer;
  ScalingPolicy scaling = [] {
    ScalingPolicy p;
    p.enabled = false;
    return p;
  }();
  MigrationLatencyModel latency;
  int splTicks = 1;
  int totalTicks = 10;
  std::uint64_t seed = 1;

  std::size_t totalGroups() const { return keyGroupsPerOperator * operators; }
  double groupCompute() const;
  double effectiveCommCost() const;
  void validate() const;
};

/// Load change for one node (spread over a seeded half of its key groups) or one key group.
struct TapeEvent {
  int tick = 0;
  bool isNode = true;
  std::uint32_t id = 0;
  double delta = 0.0;

  friend bool operator==(const TapeEvent&, const TapeEvent&) = default;
};

struct WorkloadTape {
  std::vector<TapeEvent> events;  // ordered by tick, then generation order

  std::vector<TapeEvent> at(int tick) const;
};

struct GeneratedScenario {
  ClusterState cluster;      // loads include communication surcharges
  TrafficMatrix traffic;
  WorkloadTape tape;
  ClusterState computeView;  // same placement, compute-only loads
};

GeneratedScenario generateScenario(const ScenarioConfig& config);

/// Applies the tape's events for `tick` to the loads of `cluster`; loads are clamped at 0.
ClusterState stepWorkload(const WorkloadTape& tape, int tick, const ClusterState& cluster);

/// Compute load plus commCost times the remote qualifying traffic in and out of each key group.
ClusterState withCommunicationLoad(const ClusterState& computeView, const TrafficMatrix& traffic, double commCost,
                                   double sF);

double migrationLatency(const ClusterState& cluster, const AllocationPlan& plan, const MigrationLatencyModel& model);

struct AppliedPlan {
  ClusterState cluster;
  double latencySeconds = 0.0;
};

AppliedPlan applyPlan(const ClusterState& cluster, const AllocationPlan& plan, const MigrationLatencyModel& model);

struct MetricsSample {
  int tick = 0;
  double loadDistance = 0.0;
  double loadIndex = 100.0;
  double collocationFactor = 100.0;
  std::size_t migrations = 0;
  double migrationLatency = 0.0;
  std::size_t activeNodes = 0;
  // Not part of the CSV.
  double budgetSpent = 0.0;
  std::size_t groupsOnRemovedNodes = 0;
  double solveTime = 0.0;
  ScalingAction::Kind scaling = ScalingAction::Kind::None;
};

struct MetricsSeries {
  std::string optimizer;
  double budgetLimit = 0.0;  // configured per-round budget in budget units
  std::vector<MetricsSample> samples;
  std::optional<std::string> error;  // set when a round failed; samples stop there
};

/// Runs the scenario: the first SPL initializes (no round, sets the load index
/// baseline), every later SPL runs one adaptation round and samples right after it.
MetricsSeries runScenario(const ScenarioConfig& config);

/// Same, with an explicitly supplied scenario (for comparisons on one tape).
MetricsSeries runScenario(const ScenarioConfig& config, const GeneratedScenario& scenario);

}  // namespace reconf

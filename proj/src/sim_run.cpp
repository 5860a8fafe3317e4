#include <algorithm>
#include <cmath>

#include "reconf/rng.hpp"
#include "reconf/sim.hpp"
#include "reconf/stats.hpp"

namespace reconf {

double migrationLatency(const ClusterState& cluster, const AllocationPlan& plan, const MigrationLatencyModel& model) {
  double seconds = 0.0;
  for (const auto& m : plan.migrations) seconds += model.secondsPerCostUnit * cluster.stats.at(m.group).migrCost;
  return seconds;
}

AppliedPlan applyPlan(const ClusterState& cluster, const AllocationPlan& plan, const MigrationLatencyModel& model) {
  model.validate();
  AppliedPlan out;
  out.cluster = applyAssignment(cluster, plan);
  out.latencySeconds = migrationLatency(cluster, plan, model);
  return out;
}

namespace {

double distanceOf(const ClusterState& cluster, const std::vector<double>& loads) {
  const std::size_t active = cluster.activeCount();
  if (active == 0) return 0.0;
  double total = 0.0;
  for (double l : loads) total += l;
  const double ratio = total / static_cast<double>(active);
  const double mean = std::ceil(ratio - 1e-9 * std::max(1.0, std::abs(ratio)));
  double dist = 0.0;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    if (!cluster.nodes[i].kill) dist = std::max(dist, std::abs(loads[i] - mean));
  }
  return dist;
}

double averageOf(const std::vector<double>& loads) {
  if (loads.empty()) return 0.0;
  double total = 0.0;
  for (double l : loads) total += l;
  return total / static_cast<double>(loads.size());
}

std::size_t groupsOnRemoved(const ClusterState& cluster) {
  std::size_t n = 0;
  for (const auto& [g, node] : cluster.allocation) n += cluster.node(node).kill ? 1 : 0;
  return n;
}

}  // namespace

MetricsSeries runScenario(const ScenarioConfig& config) { return runScenario(config, generateScenario(config)); }

MetricsSeries runScenario(const ScenarioConfig& config, const GeneratedScenario& scenario) {
  config.validate();
  auto optimizer = makeOptimizer(config.optimizer);
  const double commCost = config.effectiveCommCost();

  MetricsSeries series;
  series.optimizer = optimizer->name();
  series.budgetLimit = optimizer->budget().limit;

  ClusterState compute = scenario.computeView;
  ClusterState cluster = scenario.cluster;
  double baseline = 0.0;

  for (int t = 0; t < config.totalTicks; ++t) {
    if (t > 0) {
      compute.nodes = cluster.nodes;
      compute.allocation = cluster.allocation;
      compute = stepWorkload(scenario.tape, t, compute);
      cluster = withCommunicationLoad(compute, scenario.traffic, commCost, config.sF);
    }
    if (t % config.splTicks != config.splTicks - 1) continue;
    const int spl = t / config.splTicks;

    MetricsSample sample;
    sample.tick = t;
    if (spl > 0) {
      const RoundResult round =
          adaptationRound(cluster, scenario.traffic, *optimizer, config.scaling, mixSeed(config.seed, spl));
      if (round.report.error) {
        series.error = "round at tick " + std::to_string(t) + " failed: " + *round.report.error;
        break;
      }
      sample.migrations = round.report.plan.migrations.size();
      sample.migrationLatency = migrationLatency(cluster, round.report.plan, config.latency);
      sample.budgetSpent = round.report.budgetSpent;
      sample.solveTime = round.report.solveTime;
      sample.scaling = round.report.scaling.kind;
      compute.nodes = round.cluster.nodes;
      compute.allocation = round.cluster.allocation;
      cluster = withCommunicationLoad(compute, scenario.traffic, commCost, config.sF);
    }
    const std::vector<double> loads = optimizer->observedLoads(cluster, t);
    if (spl == 0) baseline = averageOf(loads);
    sample.loadDistance = distanceOf(cluster, loads);
    sample.loadIndex = baseline > 0.0 ? 100.0 * averageOf(loads) / baseline : 100.0;
    sample.collocationFactor = collocationFactor(cluster, scenario.traffic, config.sF);
    sample.activeNodes = cluster.activeCount();
    sample.groupsOnRemovedNodes = groupsOnRemoved(cluster);
    series.samples.push_back(sample);
  }
  return series;
}

}  // namespace reconf

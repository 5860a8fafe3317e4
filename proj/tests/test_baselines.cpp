#include <gtest/gtest.h>

#include <cmath>

#include "reconf/baselines.hpp"
#include "reconf/sim.hpp"
#include "reconf/stats.hpp"
#include "test_util.hpp"

using namespace reconf;
using reconf::testing::makeCluster;
using reconf::testing::randomCluster;

namespace {

double variance(const ClusterState& c) {
  double sum = 0.0, sq = 0.0, n = 0.0;
  const auto loads = nodeLoads(c);
  for (std::size_t i = 0; i < loads.size(); ++i) {
    if (c.nodes[i].kill) continue;
    sum += loads[i];
    sq += loads[i] * loads[i];
    n += 1.0;
  }
  return sq / n - (sum / n) * (sum / n);
}

}  // namespace

TEST(Flux, MovesTheGroupThatDoesNotOvershoot) {
  const auto c = makeCluster({{20, 60}, {}});
  const auto plan = fluxRebalance(c, 5);
  ASSERT_EQ(plan.migrations.size(), 1u);
  EXPECT_EQ(plan.migrations[0].group, KeyGroupId{0});
  EXPECT_EQ(nodeLoads(applyAssignment(c, plan)), (std::vector<double>{60.0, 20.0}));
}

TEST(Flux, BalancedOrZeroBudgetIsIdentity) {
  EXPECT_TRUE(fluxRebalance(makeCluster({{25, 25}, {50}}), 10).migrations.empty());
  EXPECT_TRUE(fluxRebalance(makeCluster({{20, 60}, {}}), 0).migrations.empty());
}

TEST(Flux, NeverRaisesVarianceOrExceedsBudget) {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const auto c = randomCluster(rng, 2 + rng.below(6), 4 + rng.below(30), 0);
    const std::size_t budget = rng.below(6);
    const auto plan = fluxRebalance(c, budget);
    EXPECT_LE(plan.migrations.size(), budget);
    EXPECT_LE(variance(applyAssignment(c, plan)), variance(c) + 1e-9);
    const auto byCost = fluxRebalance(c, MigrationBudget::cost(4.0));
    EXPECT_LE(MigrationBudget::cost(4.0).spent(c, byCost), 4.0);
  }
}

namespace {

// First key whose two choices differ (or coincide when `collide`).
std::uint64_t findKey(const PotcState& s, const std::vector<NodeId>& live, bool collide) {
  for (std::uint64_t key = 0;; ++key) {
    if ((s.h1(key, live) == s.h2(key, live)) == collide) return key;
  }
}

}  // namespace

TEST(Potc, RoutesToLessLoadedChoice) {
  const PotcState s(PotcConfig{});
  const std::vector<NodeId> live = {NodeId{0}, NodeId{1}, NodeId{2}};
  const auto key = findKey(s, live, false);
  const NodeId a = s.h1(key, live), b = s.h2(key, live);
  EXPECT_EQ(potcRoute(s, key, live, {{a, 10.0}, {b, 5.0}}), b);
  EXPECT_EQ(potcRoute(s, key, live, {{a, 5.0}, {b, 10.0}}), a);
  EXPECT_EQ(potcRoute(s, key, live, {{a, 7.0}, {b, 7.0}}), a);
  const auto same = findKey(s, live, true);
  EXPECT_EQ(potcRoute(s, same, live, {{s.h1(same, live), 100.0}}), s.h1(same, live));
}

TEST(Potc, MergeLoadFollowsSplitState) {
  const auto c = makeCluster({{1}, {1}, {1}});
  const std::vector<NodeId> live = {NodeId{0}, NodeId{1}, NodeId{2}};
  PotcConfig cfg;
  cfg.mergeCostFactor = 0.5;
  PotcState s(cfg);
  const auto key = findKey(s, live, false);
  s.record(key, s.h1(key, live), 4.0);
  EXPECT_TRUE(potcMergeLoad(s, c).empty());
  s.record(key, s.h2(key, live), 6.0);
  auto load = potcMergeLoad(s, c);
  ASSERT_EQ(load.size(), 1u);
  EXPECT_DOUBLE_EQ(load.at(s.h1(key, live)), 3.0);
  s.record(key, s.h2(key, live), 6.0);
  EXPECT_DOUBLE_EQ(potcMergeLoad(s, c).at(s.h1(key, live)), 6.0);
  s.merge(live);
  EXPECT_EQ(s.instancesOf(key), 1u);
  EXPECT_TRUE(potcMergeLoad(s, c).empty());
}

TEST(Potc, AtMostTwoInstancesPerKeyAndLoadConserved) {
  const auto c = makeCluster({{5, 9, 3}, {7, 1}, {4}, {8, 8}});
  PotcState s(PotcConfig{});
  const auto loads = potcPeriodLoads(s, c, false);
  double total = 0.0;
  for (double l : loads) total += l;
  EXPECT_NEAR(total, 45.0, 1e-9);
  for (std::uint64_t key = 0; key < 9 * s.config().keysPerGroup; ++key) EXPECT_LE(s.instancesOf(key), 2u);
  potcPeriodLoads(s, c, false);
  for (std::uint64_t key = 0; key < 9 * s.config().keysPerGroup; ++key) EXPECT_LE(s.instancesOf(key), 2u);
}

TEST(Cola, OnePartitionNeedsLogSplits) {
  const auto c = makeCluster({{10, 10, 10, 10, 10, 10, 10, 10}, {}, {}, {}});
  TrafficMatrix t;
  for (std::uint32_t i = 0; i + 1 < 8; ++i) t.rates[{KeyGroupId{i}, KeyGroupId{i + 1}}] = 5.0;
  const auto r = colaSolve(c, t, 1.0, 3);
  EXPECT_GE(r.splits, 2u);
  EXPECT_LE(loadDistance(applyAssignment(c, r.plan)), 1.0);
}

TEST(Cola, SingletonsReduceToGreedyBalancing) {
  const auto c = makeCluster({{30, 20, 10}, {25, 15}});
  const auto r = colaSolve(c, TrafficMatrix{}, 0.5, 1);
  // Without traffic every split is free, so the result is at least as good as
  // largest-first placement onto the lightest node (55 / 45).
  const auto loads = nodeLoads(applyAssignment(c, r.plan));
  EXPECT_LE(std::max(loads[0], loads[1]), 55.0);
  EXPECT_DOUBLE_EQ(loads[0] + loads[1], 100.0);
}

TEST(Cola, ImmediateCollocationOnOneToOne) {
  ScenarioConfig sc;
  sc.nodes = 4;
  sc.keyGroupsPerOperator = 8;
  sc.operators = 2;
  sc.placement = Placement::WorstCase;
  const auto gen = generateScenario(sc);
  const auto plan = colaAllocate(gen.cluster, gen.traffic, 10.0, 2);
  EXPECT_DOUBLE_EQ(collocationFactor(applyAssignment(gen.cluster, plan), gen.traffic, sc.sF), 100.0);
}

TEST(Sequential, DrainsBeforeBalancing) {
  const auto c = makeCluster({{40, 10}, {10}, {5, 5, 5}}, {2});
  MilpConfig cfg;
  cfg.budget = MigrationBudget::count(2);
  const auto plan = sequentialDrainThenBalance(c, cfg);
  EXPECT_EQ(plan.migrations.size(), 2u);
  for (const auto& m : plan.migrations) EXPECT_EQ(m.from, NodeId{2});
}

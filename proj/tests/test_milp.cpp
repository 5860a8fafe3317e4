#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "reconf/milp.hpp"
#include "reconf/stats.hpp"
#include "test_util.hpp"

using namespace reconf;
using reconf::testing::makeCluster;
using reconf::testing::randomCluster;

namespace {

struct Enumerated {
  double objective = INFINITY;
  double d = INFINITY;
};

// Best objective over every assignment that fits the budget and moves nothing
// into a node marked for removal.
Enumerated enumerateBest(const ClusterState& c, const MilpConfig& cfg) {
  std::vector<KeyGroupId> groups;
  for (const auto& [g, s] : c.stats) groups.push_back(g);
  const std::size_t n = c.nodes.size();
  double total = 0.0;
  for (const auto& [g, s] : c.stats) total += s.load;
  const double mean = std::ceil(total / static_cast<double>(c.activeCount()));
  Enumerated best;
  std::vector<std::size_t> at(groups.size(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == groups.size()) {
      std::vector<double> loads(n, 0.0);
      double spent = 0.0;
      double leftOnB = 0.0;
      for (std::size_t j = 0; j < groups.size(); ++j) {
        const auto& s = c.stats.at(groups[j]);
        const bool moved = c.nodes[at[j]].id != c.allocation.at(groups[j]);
        if (moved && c.nodes[at[j]].kill) return;
        loads[at[j]] += s.load;
        if (moved) spent += cfg.budget.costOf(s);
        if (c.nodes[at[j]].kill) leftOnB += s.migrCost;
      }
      if (spent > cfg.budget.limit) return;
      double hi = -INFINITY;
      double lo = INFINITY;
      for (std::size_t i = 0; i < n; ++i) {
        hi = std::max(hi, loads[i]);  // every node is bounded from above
        if (!c.nodes[i].kill) lo = std::min(lo, loads[i]);
      }
      const double d = std::max(hi - mean, mean - lo);
      if (mean - d < 0) return;
      const double slack = (d - (hi - mean)) + (d - (mean - lo));
      const double f = cfg.w1 * d + cfg.wB * leftOnB - cfg.w2 * slack;
      if (f < best.objective) best = {f, d};
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      at[k] = i;
      rec(k + 1);
    }
  };
  rec(0);
  return best;
}

}  // namespace

TEST(BuildModel, CountsVariablesAndConstraints) {
  const auto c = makeCluster({{1, 2}, {3}});
  const auto m = buildModel(c, MilpConfig{});
  EXPECT_EQ(m.binaryCount(), 6u);
  EXPECT_EQ(m.constraintCount(ConstraintKind::Assignment), 3u);
  EXPECT_EQ(m.constraintCount(ConstraintKind::UpperLoad), 2u);
  EXPECT_EQ(m.constraintCount(ConstraintKind::LowerLoad), 2u);
  EXPECT_EQ(m.constraintCount(ConstraintKind::MeanFloor), 1u);
}

TEST(BuildModel, KilledNodeHasNoLowerLoadRow) {
  const auto c = makeCluster({{1, 2}, {3}}, {1});
  const auto m = buildModel(c, MilpConfig{});
  EXPECT_EQ(m.constraintCount(ConstraintKind::UpperLoad), 2u);
  EXPECT_EQ(m.constraintCount(ConstraintKind::LowerLoad), 1u);
  const std::string lp = m.toLpFormat();
  EXPECT_NE(lp.find("lower_n0"), std::string::npos);
  EXPECT_EQ(lp.find("lower_n1"), std::string::npos);
  EXPECT_NE(lp.find("Subject To"), std::string::npos);
  EXPECT_NE(lp.find("Binary"), std::string::npos);
  // Groups 0 and 1 sit on n0, so only they are barred from n1.
  EXPECT_EQ(m.constraintCount(ConstraintKind::NoInflow), 2u);
  EXPECT_NE(lp.find("noinflow_n1_g0: x_n1_g0 = 0"), std::string::npos);
  EXPECT_EQ(lp.find("noinflow_n1_g2"), std::string::npos);
}

TEST(BuildModel, PinIntoRemovedNodeIsInfeasible) {
  const CollocationConstraint pins[] = {{{KeyGroupId{0}}, NodeId{1}}};
  EXPECT_THROW(buildModel(makeCluster({{1}, {1}}, {1}), MilpConfig{}, pins), InfeasibleError);
}

TEST(BuildModel, RejectsBadInput) {
  EXPECT_THROW(buildModel(makeCluster({{1}}, {0}), MilpConfig{}), Error);
  MilpConfig bad;
  bad.w1 = 1.0;
  bad.w2 = 1.0;
  EXPECT_THROW(buildModel(makeCluster({{1}}), bad), Error);
  const CollocationConstraint pins[] = {{{KeyGroupId{0}}, NodeId{0}}, {{KeyGroupId{0}}, NodeId{1}}};
  EXPECT_THROW(buildModel(makeCluster({{1}, {1}}), MilpConfig{}, pins), InfeasibleError);
}

TEST(Solve, ZeroBudgetForcesIdentity) {
  MilpConfig cfg;
  cfg.budget = MigrationBudget::cost(0.0);
  const auto sol = solveMilp(makeCluster({{30, 30, 40}, {}}), cfg);
  EXPECT_TRUE(sol.plan.migrations.empty());
}

TEST(Solve, ThreeGroupsTwoNodes) {
  const auto c = makeCluster({{30, 30, 40}, {}});
  const double oracle = enumerateBest(c, MilpConfig{}).d;
  EXPECT_DOUBLE_EQ(oracle, 10.0);
  const auto sol = solveMilp(c, MilpConfig{});
  EXPECT_DOUBLE_EQ(sol.plan.objective.d, oracle);
  EXPECT_DOUBLE_EQ(loadDistance(applyAssignment(c, sol.plan)), 10.0);
  EXPECT_TRUE(sol.optimal);
  const auto brute = bruteForceSolve(buildModel(c, MilpConfig{}));
  EXPECT_DOUBLE_EQ(brute.plan.objective.d, 10.0);
  EXPECT_DOUBLE_EQ(brute.objectiveValue, sol.objectiveValue);
}

TEST(Solve, NeverParksLoadOnRemovedNodeForSlack) {
  // Moving the load-1 group from n0 into n2 keeps d = 1 and would raise du from 1
  // to 2; the no-inflow rows rule it out in the solver and the oracle alike.
  auto c = makeCluster({{1, 15, 23, 21, 28}, {15, 4, 18}, {18}, {20}}, {2, 3});
  const auto model = buildModel(c, MilpConfig{});
  const auto sol = solve(model);
  const auto brute = bruteForceSolve(model);
  EXPECT_EQ(sol.objectiveValue, brute.objectiveValue);
  for (const auto& m : sol.plan.migrations) EXPECT_FALSE(c.node(m.to).kill);
  for (const auto& m : brute.plan.migrations) EXPECT_FALSE(c.node(m.to).kill);
}

TEST(Solve, DrainsSmallGroupDespiteRoundedMean) {
  // mean = ceil(21 / 2) = 11 and d = 1 either way; without the B term, keeping the
  // group on n2 would win on du + dl.
  const auto c = makeCluster({{10}, {10}, {1}}, {2});
  const auto sol = solveMilp(c, MilpConfig{});
  EXPECT_TRUE(applyAssignment(c, sol.plan).groupsOn(NodeId{2}).empty());
  MilpConfig exact;
  exact.wB = 0.0;
  const auto kept = solveMilp(c, exact);
  EXPECT_TRUE(kept.plan.migrations.empty());
}

TEST(Solve, BudgetGoesToRemovalNodeByCost) {
  // n1 is overloaded but the budget of 4 goes to n2: moving the two cost-2 groups
  // leaves cost 3 behind, moving the cost-3 group would leave 4.
  auto c = makeCluster({{5}, {30}, {9, 1, 1}}, {2});
  c.stats[KeyGroupId{2}].migrCost = 3.0;
  c.stats[KeyGroupId{3}].migrCost = 2.0;
  c.stats[KeyGroupId{4}].migrCost = 2.0;
  MilpConfig cfg;
  cfg.budget = MigrationBudget::cost(4.0);
  const auto sol = solveMilp(c, cfg);
  const auto after = applyAssignment(c, sol.plan);
  EXPECT_EQ(after.groupsOn(NodeId{2}), (std::vector<KeyGroupId>{KeyGroupId{2}}));
  EXPECT_DOUBLE_EQ(sol.plan.objective.d, enumerateBest(c, cfg).d);
}

TEST(Solve, BalancedClusterStays) {
  const auto c = makeCluster({{20, 30}, {25, 25}, {50}});
  const auto sol = solveMilp(c, MilpConfig{});
  EXPECT_TRUE(sol.plan.migrations.empty());
  EXPECT_DOUBLE_EQ(sol.plan.objective.d, 0.0);
}

TEST(Solve, DrainsKilledNode) {
  const auto c = makeCluster({{30}, {20}, {10}}, {2});
  const auto sol = solveMilp(c, MilpConfig{});
  EXPECT_EQ(sol.plan.assignment.at(KeyGroupId{2}), NodeId{1});
  EXPECT_DOUBLE_EQ(sol.plan.objective.d, enumerateBest(c, MilpConfig{}).d);
}

TEST(Solve, RespectsCountBudget) {
  const auto c = makeCluster({{10, 10, 10, 10, 10, 10}, {}, {}});
  MilpConfig cfg;
  cfg.budget = MigrationBudget::count(2);
  const auto sol = solveMilp(c, cfg);
  EXPECT_LE(sol.plan.migrations.size(), 2u);
  EXPECT_DOUBLE_EQ(sol.plan.objective.d, enumerateBest(c, cfg).d);
}

TEST(Solve, PinsAndIndivisibleSetsHold) {
  const auto c = makeCluster({{10, 10, 10, 10}, {}, {}});
  const CollocationConstraint pins[] = {{{KeyGroupId{0}, KeyGroupId{1}}, NodeId{2}}};
  const IndivisibleGroup sets[] = {{{KeyGroupId{2}, KeyGroupId{3}}}};
  const auto sol = solveMilp(c, MilpConfig{}, pins, sets);
  EXPECT_EQ(sol.plan.assignment.at(KeyGroupId{0}), NodeId{2});
  EXPECT_EQ(sol.plan.assignment.at(KeyGroupId{1}), NodeId{2});
  EXPECT_EQ(sol.plan.assignment.at(KeyGroupId{2}), sol.plan.assignment.at(KeyGroupId{3}));
}

TEST(Solve, InfeasibleReportsBound) {
  // A pin that requires a move under a zero budget.
  const auto c = makeCluster({{10}, {90}});
  MilpConfig cfg;
  cfg.budget = MigrationBudget::count(0);
  const CollocationConstraint pins[] = {{{KeyGroupId{0}}, NodeId{1}}};
  EXPECT_THROW(solveMilp(c, cfg, pins), InfeasibleError);
}

TEST(BruteForce, SingleNodeIdentity) {
  const auto sol = bruteForceSolve(buildModel(makeCluster({{5, 7}}), MilpConfig{}));
  EXPECT_TRUE(sol.plan.migrations.empty());
  EXPECT_DOUBLE_EQ(sol.plan.objective.d, 0.0);
}

TEST(BruteForce, RefusesOversizeModels) {
  std::vector<double> many(12, 1.0);
  EXPECT_THROW(bruteForceSolve(buildModel(makeCluster({many, {}, {}, {}, {}}), MilpConfig{})), Error);
}

TEST(Solve, AgreesWithOracleAndNeverTargetsB) {
  Rng rng(99);
  for (int t = 0; t < 60; ++t) {
    const std::size_t n = 2 + rng.below(3);
    const auto c = randomCluster(rng, n, 2 + rng.below(6), rng.below(2));
    MilpConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t);
    if (rng.coin()) cfg.budget = MigrationBudget::cost(static_cast<double>(rng.below(8)));
    const auto model = buildModel(c, cfg);
    const Enumerated expected = enumerateBest(c, cfg);
    const double tol = 1e-9 * (1.0 + std::abs(expected.objective));
    try {
      EXPECT_NEAR(bruteForceSolve(model).objectiveValue, expected.objective, tol) << "instance " << t;
    } catch (const InfeasibleError&) {
      EXPECT_TRUE(std::isinf(expected.objective)) << "instance " << t;
    }
    try {
      const auto sol = solve(model);
      EXPECT_NEAR(sol.objectiveValue, expected.objective, tol) << "instance " << t;
      for (const auto& m : sol.plan.migrations) {
        EXPECT_FALSE(c.node(m.to).kill) << "instance " << t;
        EXPECT_FALSE(c.node(m.from).kill && c.node(m.to).kill);
      }
    } catch (const InfeasibleError&) {
      EXPECT_TRUE(std::isinf(expected.objective)) << "instance " << t;
    }
  }
}

TEST(RelaxationBound, NeverAboveOptimum) {
  Rng rng(5);
  for (int t = 0; t < 40; ++t) {
    const auto c = randomCluster(rng, 3, 7, rng.below(2));
    const auto model = buildModel(c, MilpConfig{});
    try {
      const auto sol = bruteForceSolve(model);
      EXPECT_LE(relaxationBoundD(model), sol.plan.objective.d + 1e-9);
    } catch (const InfeasibleError&) {
    }
  }
}

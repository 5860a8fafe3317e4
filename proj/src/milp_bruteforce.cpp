#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "reconf/milp.hpp"

namespace reconf {

MilpSolution bruteForceSolve(const MilpModel& model) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = model.nodes.size();
  const std::size_t g = model.groups.size();
  if (static_cast<double>(g) * std::log(static_cast<double>(std::max<std::size_t>(n, 1))) >
      std::log(kBruteForceLimit) + 1e-12) {
    throw Error("exhaustive search limited to " + std::to_string(static_cast<long long>(kBruteForceLimit)) +
                " assignments; instance has " + std::to_string(n) + "^" + std::to_string(g));
  }

  // Constraint lookups keyed by group index.
  std::vector<std::size_t> pinned(g, SIZE_MAX);
  for (const auto& pin : model.pins) {
    const std::size_t node = std::lower_bound(model.nodes.begin(), model.nodes.end(), pin.targetNode) -
                             model.nodes.begin();
    for (KeyGroupId id : pin.groups) {
      const std::size_t k = std::lower_bound(model.groups.begin(), model.groups.end(), id) - model.groups.begin();
      if (pinned[k] != SIZE_MAX && pinned[k] != node) {
        throw InfeasibleError("key group pinned to two different nodes", std::numeric_limits<double>::infinity());
      }
      pinned[k] = node;
    }
  }
  std::vector<std::vector<std::size_t>> together;
  auto indexOf = [&](KeyGroupId id) {
    return static_cast<std::size_t>(std::lower_bound(model.groups.begin(), model.groups.end(), id) -
                                    model.groups.begin());
  };
  for (const auto& ind : model.indivisible) {
    std::vector<std::size_t> members;
    for (KeyGroupId id : ind.members) members.push_back(indexOf(id));
    together.push_back(std::move(members));
  }
  for (const auto& pin : model.pins) {
    std::vector<std::size_t> members;
    for (KeyGroupId id : pin.groups) members.push_back(indexOf(id));
    together.push_back(std::move(members));
  }

  std::vector<std::size_t> x(g, 0);
  std::vector<std::size_t> bestX;
  double bestObj = std::numeric_limits<double>::infinity();
  double bestD = 0.0, bestDu = 0.0, bestDl = 0.0, bestCost = 0.0;
  std::vector<double> sums(n);

  while (true) {
    bool ok = true;
    for (std::size_t k = 0; k < g && ok; ++k) ok = pinned[k] == SIZE_MAX || x[k] == pinned[k];
    for (std::size_t k = 0; k < g && ok; ++k) ok = !model.kill[x[k]] || x[k] == model.current[k];
    for (const auto& set : together) {
      for (std::size_t k : set) ok = ok && x[k] == x[set.front()];
    }
    if (ok) {
      std::fill(sums.begin(), sums.end(), 0.0);
      double cost = 0.0;
      double costB = 0.0;
      for (std::size_t k = 0; k < g; ++k) {
        sums[x[k]] += model.gLoad[k];
        if (x[k] != model.current[k]) cost += model.migrCost[k];
        if (model.kill[x[k]]) costB += model.migrCost[k];
      }
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        const double l = sums[i] * model.capacity[i];
        hi = std::max(hi, l);
        if (!model.kill[i]) lo = std::min(lo, l);
      }
      // Smallest d meeting the upper rows on N and lower rows on A, with the
      // slack variables taking whatever is left.
      const double d = std::max(hi - model.mean, model.mean - lo);
      const double du = d - (hi - model.mean);
      const double dl = d - (model.mean - lo);
      const double obj = model.config.w1 * d + model.config.wB * costB - model.config.w2 * (du + dl);
      if (cost <= model.config.budget.limit && model.mean - d >= 0.0 && obj < bestObj) {
        bestObj = obj;
        bestX = x;
        bestD = d;
        bestDu = du;
        bestDl = dl;
        bestCost = cost;
      }
    }
    std::size_t pos = g;
    while (pos > 0 && ++x[pos - 1] == n) x[--pos] = 0;
    if (pos == 0) break;
  }

  if (bestX.empty() && g > 0) {
    throw InfeasibleError("no allocation satisfies the constraints", std::numeric_limits<double>::infinity());
  }
  MilpSolution sol;
  sol.nodeOfGroup = bestX;
  sol.objectiveValue = g > 0 ? bestObj : 0.0;
  sol.bestBound = sol.objectiveValue;
  sol.optimal = true;
  for (std::size_t k = 0; k < g; ++k) {
    sol.plan.assignment.emplace(model.groups[k], model.nodes[bestX[k]]);
    if (bestX[k] != model.current[k]) {
      sol.plan.migrations.push_back({model.groups[k], model.nodes[model.current[k]], model.nodes[bestX[k]]});
    }
  }
  sol.plan.objective = {bestD, bestDu, bestDl, bestCost};
  sol.solveTime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace reconf

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include "reconf/milp.hpp"
#include "reconf/rng.hpp"

namespace reconf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

class Deadline {
 public:
  explicit Deadline(double seconds) : start_(Clock::now()), seconds_(seconds) {}
  bool expired() const { return elapsed() > seconds_; }
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  Clock::time_point start_;
  double seconds_;
};

// Unit-level view of the model shared by local search, branch-and-bound and the
// relaxation bound.
struct Instance {
  const MilpModel& m;
  std::size_t nodes = 0;
  std::size_t units = 0;
  std::vector<double> load;   // unweighted load per unit
  std::vector<double> cost;   // units x nodes: budget units to place the unit there
  std::vector<std::size_t> home;
  std::vector<std::size_t> stay;  // node holding every group of the unit, or SIZE_MAX
  std::vector<double> moveCost;   // migration cost of moving the whole unit
  std::vector<std::size_t> unitOf;
  std::vector<double> minCost;
  double coeffD = 0.0;
  double limit = kInf;
  double budgetTol = 0.0;

  explicit Instance(const MilpModel& model) : m(model), nodes(model.nodes.size()), units(model.units.size()) {
    load.assign(units, 0.0);
    cost.assign(units * nodes, 0.0);
    home.assign(units, 0);
    stay.assign(units, SIZE_MAX);
    minCost.assign(units, 0.0);
    moveCost.assign(units, 0.0);
    unitOf.assign(model.groups.size(), 0);
    for (std::size_t u = 0; u < units; ++u) {
      for (std::size_t k : model.units[u]) {
        unitOf[k] = u;
        load[u] += model.gLoad[k];
        moveCost[u] += model.migrCost[k];
        for (std::size_t i = 0; i < nodes; ++i) {
          if (model.current[k] != i) cost[u * nodes + i] += model.migrCost[k];
        }
      }
      const std::size_t first = model.current[model.units[u].front()];
      if (std::all_of(model.units[u].begin(), model.units[u].end(),
                      [&](std::size_t k) { return model.current[k] == first; })) {
        stay[u] = first;
      }
      if (model.unitTarget[u]) {
        home[u] = *model.unitTarget[u];
      } else {
        std::size_t best = SIZE_MAX;
        for (std::size_t i = 0; i < nodes; ++i) {
          if (allowed(u, i) && (best == SIZE_MAX || c(u, i) < c(u, best))) best = i;
        }
        home[u] = best;
      }
      minCost[u] = c(u, home[u]);
    }
    coeffD = model.config.w1 - 2.0 * model.config.w2;
    limit = model.config.budget.limit;
    budgetTol = std::isfinite(limit) ? 1e-9 * (1.0 + limit) : 0.0;
  }

  double c(std::size_t u, std::size_t i) const { return cost[u * nodes + i]; }
  bool movable(std::size_t u) const { return !m.unitTarget[u]; }
  bool active(std::size_t i) const { return !m.kill[i]; }
  bool allowed(std::size_t u, std::size_t i) const { return active(i) || stay[u] == i; }
  // Migration cost left behind on a node marked for removal when unit u sits on i.
  double stranded(std::size_t u, std::size_t i) const { return !active(i) && stay[u] == i ? moveCost[u] : 0.0; }

  double objective(double maxL, double minA, double costB) const {
    const double d = std::max(maxL - m.mean, m.mean - minA);
    return coeffD * d + m.config.w2 * (maxL - minA) + m.config.wB * costB;
  }

  // Search key: the exact objective, or d alone. Raising the minimum of A usually
  // needs several moves that each widen the spread a little, so the first phase
  // ranks by d and lets the potential below break the plateau.
  double key(double maxL, double minA, double costB, bool dOnly) const {
    return dOnly ? std::max(maxL - m.mean, m.mean - minA) : objective(maxL, minA, costB);
  }

  // Secondary search potential: spread of A around the mean, load left on B.
  double potential(std::size_t i, double l) const {
    return active(i) ? (l - m.mean) * (l - m.mean) : l * l;
  }
};

struct State {
  std::vector<std::size_t> at;  // node per unit
  std::vector<double> sum;      // unweighted node sums, group order
  double cost = 0.0;
  double costB = 0.0;           // migration cost left on nodes marked for removal
};

void refresh(const Instance& in, State& s) {
  s.sum.assign(in.nodes, 0.0);
  s.cost = 0.0;
  s.costB = 0.0;
  for (std::size_t u = 0; u < in.units; ++u) s.costB += in.stranded(u, s.at[u]);
  for (std::size_t k = 0; k < in.m.groups.size(); ++k) {
    const std::size_t i = s.at[in.unitOf[k]];
    s.sum[i] += in.m.gLoad[k];
    if (i != in.m.current[k]) s.cost += in.m.migrCost[k];
  }
}

struct Score {
  double f = kInf;
  double g = kInf;
};

Score score(const Instance& in, const State& s, bool dOnly = false) {
  double maxL = -kInf;
  double minA = kInf;
  double g = 0.0;
  for (std::size_t i = 0; i < in.nodes; ++i) {
    const double l = s.sum[i] * in.m.capacity[i];
    maxL = std::max(maxL, l);
    if (in.active(i)) minA = std::min(minA, l);
    g += in.potential(i, l);
  }
  return {in.key(maxL, minA, s.costB, dOnly), g};
}

bool better(const Score& a, const Score& b) {
  const double epsF = 1e-9 * (1.0 + std::abs(b.f));
  const double epsG = 1e-9 * (1.0 + std::abs(b.g));
  return a.f < b.f - epsF || (a.f <= b.f + epsF && a.g < b.g - epsG);
}

// The three heaviest nodes and the three lightest nodes of A, so that the
// extremes after changing two nodes are available in constant time.
struct Extremes {
  std::array<std::size_t, 3> top{};
  std::array<std::size_t, 3> bottom{};
  std::size_t nTop = 0;
  std::size_t nBottom = 0;
  std::vector<double> loads;

  Extremes(const Instance& in, const State& s) : loads(in.nodes) {
    for (std::size_t i = 0; i < in.nodes; ++i) loads[i] = s.sum[i] * in.m.capacity[i];
    for (std::size_t i = 0; i < in.nodes; ++i) {
      insert(top, nTop, i, [&](std::size_t a, std::size_t b) { return loads[a] > loads[b]; });
      if (in.active(i)) {
        insert(bottom, nBottom, i, [&](std::size_t a, std::size_t b) { return loads[a] < loads[b]; });
      }
    }
  }

  template <class Before>
  static void insert(std::array<std::size_t, 3>& arr, std::size_t& n, std::size_t i, Before before) {
    std::size_t pos = n;
    while (pos > 0 && before(i, arr[pos - 1])) --pos;
    if (pos >= 3) return;
    for (std::size_t j = std::min<std::size_t>(n, 2); j > pos; --j) arr[j] = arr[j - 1];
    arr[pos] = i;
    n = std::min<std::size_t>(n + 1, 3);
  }

  double maxExcept(std::size_t a, std::size_t b) const {
    for (std::size_t j = 0; j < nTop; ++j) {
      if (top[j] != a && top[j] != b) return loads[top[j]];
    }
    return -kInf;
  }
  double minExcept(std::size_t a, std::size_t b) const {
    for (std::size_t j = 0; j < nBottom; ++j) {
      if (bottom[j] != a && bottom[j] != b) return loads[bottom[j]];
    }
    return kInf;
  }
};

struct Move {
  std::size_t u = SIZE_MAX;
  std::size_t to = 0;
  std::size_t v = SIZE_MAX;  // swap partner, SIZE_MAX for a plain move
};

class LocalSearch {
 public:
  LocalSearch(const Instance& in, const Deadline& deadline) : in_(in), deadline_(deadline) {}

  State initial() const {
    State s;
    s.at = in_.home;
    refresh(in_, s);
    return s;
  }

  void descend(State& s, bool dOnly) const {
    const std::size_t maxIter = 20 * in_.units + 1000;
    for (std::size_t iter = 0; iter < maxIter; ++iter) {
      if ((iter & 63) == 63 && deadline_.expired()) return;
      const Extremes ext(in_, s);
      const Score cur = score(in_, s, dOnly);
      Score best = cur;
      Move bestMove;

      auto consider = [&](std::size_t a, double la, std::size_t b, double lb, double dc, double dB, const Move& mv) {
        if (s.cost + dc > in_.limit + in_.budgetTol) return;
        const double maxL = std::max({ext.maxExcept(a, b), la, lb});
        double minA = ext.minExcept(a, b);
        if (in_.active(a)) minA = std::min(minA, la);
        if (in_.active(b)) minA = std::min(minA, lb);
        const Score cand{in_.key(maxL, minA, s.costB + dB, dOnly),
                         cur.g - in_.potential(a, ext.loads[a]) - in_.potential(b, ext.loads[b]) +
                             in_.potential(a, la) + in_.potential(b, lb)};
        if (better(cand, best)) {
          best = cand;
          bestMove = mv;
        }
      };

      auto tryMove = [&](std::size_t u, std::size_t b) {
        const std::size_t a = s.at[u];
        if (a == b || !in_.allowed(u, b)) return;
        const double la = (s.sum[a] - in_.load[u]) * in_.m.capacity[a];
        const double lb = (s.sum[b] + in_.load[u]) * in_.m.capacity[b];
        consider(a, la, b, lb, in_.c(u, b) - in_.c(u, a), in_.stranded(u, b) - in_.stranded(u, a), Move{u, b});
      };

      for (std::size_t u = 0; u < in_.units; ++u) {
        if (!in_.movable(u)) continue;
        for (std::size_t j = 0; j < ext.nBottom; ++j) tryMove(u, ext.bottom[j]);
        tryMove(u, in_.home[u]);
        if (ext.nTop > 0 && s.at[u] == ext.top[0]) {
          for (std::size_t b = 0; b < in_.nodes; ++b) tryMove(u, b);
        }
      }

      // Swaps among units on the extreme nodes.
      std::vector<std::size_t> focus(ext.top.begin(), ext.top.begin() + ext.nTop);
      focus.insert(focus.end(), ext.bottom.begin(), ext.bottom.begin() + ext.nBottom);
      std::sort(focus.begin(), focus.end());
      focus.erase(std::unique(focus.begin(), focus.end()), focus.end());
      std::vector<std::size_t> onFocus;
      for (std::size_t u = 0; u < in_.units; ++u) {
        if (in_.movable(u) && std::binary_search(focus.begin(), focus.end(), s.at[u])) onFocus.push_back(u);
      }
      for (std::size_t x = 0; x < onFocus.size(); ++x) {
        for (std::size_t y = x + 1; y < onFocus.size(); ++y) {
          const std::size_t u = onFocus[x];
          const std::size_t v = onFocus[y];
          const std::size_t a = s.at[u];
          const std::size_t b = s.at[v];
          if (a == b || in_.load[u] == in_.load[v] || !in_.allowed(u, b) || !in_.allowed(v, a)) continue;
          const double la = (s.sum[a] - in_.load[u] + in_.load[v]) * in_.m.capacity[a];
          const double lb = (s.sum[b] - in_.load[v] + in_.load[u]) * in_.m.capacity[b];
          const double dc = in_.c(u, b) + in_.c(v, a) - in_.c(u, a) - in_.c(v, b);
          const double dB = in_.stranded(u, b) + in_.stranded(v, a) - in_.stranded(u, a) - in_.stranded(v, b);
          consider(a, la, b, lb, dc, dB, Move{u, b, v});
        }
      }

      if (bestMove.u == SIZE_MAX) return;
      if (!apply(s, bestMove)) return;
    }
  }

  // Moves units back to their cheapest node while the objective does not get worse.
  void cleanup(State& s) const {
    bool changed = true;
    while (changed && !deadline_.expired()) {
      changed = false;
      for (std::size_t u = 0; u < in_.units; ++u) {
        if (!in_.movable(u) || s.at[u] == in_.home[u] || !in_.active(in_.home[u])) continue;
        const Score before = score(in_, s);
        const std::size_t from = s.at[u];
        s.at[u] = in_.home[u];
        refresh(in_, s);
        if (score(in_, s).f <= before.f) {
          changed = true;
        } else {
          s.at[u] = from;
          refresh(in_, s);
        }
      }
    }
  }

  void perturb(State& s, Rng& rng) const {
    const Extremes ext(in_, s);
    std::vector<std::size_t> activeNodes;
    for (std::size_t i = 0; i < in_.nodes; ++i) {
      if (in_.active(i)) activeNodes.push_back(i);
    }
    const std::size_t steps = 1 + rng.below(3);
    for (std::size_t step = 0; step < steps; ++step) {
      if (std::isfinite(in_.limit) && rng.coin()) {
        std::vector<std::size_t> away;
        for (std::size_t u = 0; u < in_.units; ++u) {
          if (in_.movable(u) && s.at[u] != in_.home[u]) away.push_back(u);
        }
        if (!away.empty()) {
          const std::size_t u = away[rng.below(away.size())];
          s.at[u] = in_.home[u];
          refresh(in_, s);
        }
      }
      const std::size_t src = ext.nTop > 0 ? ext.top[rng.below(ext.nTop)] : 0;
      std::vector<std::size_t> cands;
      for (std::size_t u = 0; u < in_.units; ++u) {
        if (in_.movable(u) && s.at[u] == src) cands.push_back(u);
      }
      if (cands.empty() || activeNodes.empty()) continue;
      const std::size_t u = cands[rng.below(cands.size())];
      const std::size_t to = activeNodes[rng.below(activeNodes.size())];
      const std::size_t from = s.at[u];
      s.at[u] = to;
      refresh(in_, s);
      if (s.cost > in_.limit) {
        s.at[u] = from;
        refresh(in_, s);
      }
    }
  }

 private:
  bool apply(State& s, const Move& mv) const {
    State next = s;
    if (mv.v != SIZE_MAX) {
      next.at[mv.v] = s.at[mv.u];
    }
    next.at[mv.u] = mv.to;
    refresh(in_, next);
    if (next.cost > in_.limit) return false;
    s = std::move(next);
    return true;
  }

  const Instance& in_;
  const Deadline& deadline_;
};

// Depth-first search over units in index order and nodes in ascending order,
// which enumerates assignments lexicographically. The final incumbent is the
// lexicographically first assignment with the smallest objective.
class BranchAndBound {
 public:
  BranchAndBound(const Instance& in, double fLocal, const Deadline& deadline, std::size_t nodeLimit)
      : in_(in), fLocal_(fLocal), deadline_(deadline), nodeLimit_(nodeLimit) {
    const std::size_t n = in.units;
    restLoad_.assign(n + 1, 0.0);
    restCost_.assign(n + 1, 0.0);
    restB_.assign(n + 1, 0.0);
    for (std::size_t u = n; u-- > 0;) {
      restLoad_[u] = restLoad_[u + 1] + in.load[u];
      restB_[u] = restB_[u + 1] + (in.stay[u] != SIZE_MAX ? in.stranded(u, in.stay[u]) : 0.0);
      double cheapest = in.minCost[u];
      if (in.movable(u)) {
        for (std::size_t i = 0; i < in.nodes; ++i) cheapest = std::min(cheapest, in.c(u, i));
      }
      restCost_[u] = restCost_[u + 1] + cheapest;
    }
    for (std::size_t i = 0; i < in.nodes; ++i) {
      if (in.active(i)) {
        ++activeCount_;
        capMaxA_ = std::max(capMaxA_, in.m.capacity[i]);
      }
    }
    double total = 0.0;
    for (double l : in.m.gLoad) total += l;
    double capMax = 0.0;
    for (double c : in.m.capacity) capMax = std::max(capMax, c);
    margin_ = 1e-9 * (in.m.config.w1 * (1.0 + std::abs(in.m.mean) + capMax * total) + in.m.config.wB * restB_[0]);
    sum_.assign(in.nodes, 0.0);
    nodeOfGroup_.assign(in.m.groups.size(), 0);
  }

  // Returns true when the search space was exhausted.
  bool run() {
    dfs(0, 0.0, 0.0);
    return !aborted_;
  }

  bool found() const { return found_; }
  const std::vector<std::size_t>& best() const { return best_; }

 private:
  void dfs(std::size_t k, double cost, double costB) {
    if (aborted_) return;
    if (++visited_ > nodeLimit_ || ((visited_ & 4095) == 0 && deadline_.expired())) {
      aborted_ = true;
      return;
    }
    if (k == in_.units) {
      leaf();
      return;
    }
    const auto& target = in_.m.unitTarget[k];
    const std::size_t first = target ? *target : 0;
    const std::size_t last = target ? *target + 1 : in_.nodes;
    for (std::size_t i = first; i < last && !aborted_; ++i) {
      if (!in_.allowed(k, i)) continue;
      const double c = cost + in_.c(k, i);
      if (c + restCost_[k + 1] > in_.limit + in_.budgetTol) continue;
      const double b = costB + in_.stranded(k, i);
      sum_[i] += in_.load[k];
      if (!prune(k + 1, c, b)) {
        for (std::size_t g : in_.m.units[k]) nodeOfGroup_[g] = i;
        dfs(k + 1, c, b);
      }
      sum_[i] -= in_.load[k];
    }
  }

  // Budget spent so far is cost; every unit of undecided removal-node cost beyond
  // the remaining budget has to stay.
  bool prune(std::size_t next, double cost, double costB) const {
    const double rest = restLoad_[next];
    const double budgetLeft = std::isfinite(in_.limit) ? std::max(0.0, in_.limit + in_.budgetTol - cost - restCost_[next]) : kInf;
    const double costBLB = costB + std::max(0.0, restB_[next] - budgetLeft);
    double maxP = -kInf;
    double sumA = 0.0;
    double minEach = kInf;
    for (std::size_t i = 0; i < in_.nodes; ++i) {
      const double l = sum_[i] * in_.m.capacity[i];
      maxP = std::max(maxP, l);
      if (in_.active(i)) {
        sumA += l;
        minEach = std::min(minEach, (sum_[i] + rest) * in_.m.capacity[i]);
      }
    }
    const double minUB = std::min(minEach, (sumA + capMaxA_ * rest) / static_cast<double>(activeCount_));
    const double dLB = std::max(maxP - in_.m.mean, in_.m.mean - minUB);
    if (dLB > in_.m.mean + 1e-9 * (1.0 + std::abs(in_.m.mean))) return true;
    const double fLB = in_.coeffD * dLB + in_.m.config.w2 * (maxP - minUB) + in_.m.config.wB * costBLB;
    if (!found_) return fLB > fLocal_ + margin_;
    return fLB - margin_ >= fIncumbent_;
  }

  void leaf() {
    const ModelEvaluation ev = evaluate(in_.m, nodeOfGroup_);
    if (!ev.feasible) return;
    const bool accept = found_ ? ev.objective < fIncumbent_ : ev.objective <= fLocal_;
    if (!accept) return;
    found_ = true;
    fIncumbent_ = ev.objective;
    best_ = nodeOfGroup_;
  }

  const Instance& in_;
  double fLocal_;
  const Deadline& deadline_;
  std::size_t nodeLimit_;
  std::vector<double> restLoad_;
  std::vector<double> restCost_;
  std::vector<double> restB_;
  std::vector<double> sum_;
  std::vector<std::size_t> nodeOfGroup_;
  std::vector<std::size_t> best_;
  std::size_t activeCount_ = 0;
  double capMaxA_ = 0.0;
  double margin_ = 0.0;
  double fIncumbent_ = kInf;
  bool found_ = false;
  bool aborted_ = false;
  std::size_t visited_ = 0;
};

std::vector<std::size_t> groupAssignment(const Instance& in, const State& s) {
  std::vector<std::size_t> out(in.m.groups.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = s.at[in.unitOf[k]];
  return out;
}

// Relaxed feasibility of deviation d: units may be split and moved fractionally.
bool relaxedFeasible(const Instance& in, const std::vector<double>& sums, double forcedCost,
                     const std::vector<std::vector<std::pair<double, double>>>& shed,
                     const std::vector<double>& fixedLoad, double d) {
  const double mean = in.m.mean;
  const double hi = mean + d;
  const double lo = mean - d;
  double total = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < in.nodes; ++i) {
    total += sums[i];
    if (in.active(i)) ++active;
  }
  if (total > static_cast<double>(in.nodes) * hi) return false;
  if (total < static_cast<double>(active) * lo) return false;

  double cost = forcedCost;
  double deficit = 0.0;
  double excess = 0.0;
  std::vector<std::pair<double, double>> spare;  // (ratio, amount) beyond each node's excess
  for (std::size_t i = 0; i < in.nodes; ++i) {
    const double floor = in.active(i) ? std::max(lo, fixedLoad[i]) : fixedLoad[i];
    if (in.active(i) && sums[i] < lo) deficit += lo - sums[i];
    if (fixedLoad[i] > hi) return false;
    double need = std::max(0.0, sums[i] - hi);
    excess += need;
    double room = std::max(0.0, std::min(sums[i], hi) - floor);
    for (const auto& [ratio, amount] : shed[i]) {
      const double take = std::min(need, amount);
      cost += ratio * take;
      need -= take;
      const double leftover = amount - take;
      if (leftover > 0.0 && room > 0.0) {
        const double extra = std::min(leftover, room);
        spare.emplace_back(ratio, extra);
        room -= extra;
      }
    }
    if (need > 1e-12) return false;
  }
  double extraNeeded = std::max(0.0, deficit - excess);
  std::sort(spare.begin(), spare.end());
  for (const auto& [ratio, amount] : spare) {
    if (extraNeeded <= 0.0) break;
    const double take = std::min(extraNeeded, amount);
    cost += ratio * take;
    extraNeeded -= take;
  }
  if (extraNeeded > 1e-9 * (1.0 + deficit)) return false;
  return cost <= in.limit + in.budgetTol;
}

double relaxationBound(const Instance& in, double upper) {
  for (double c : in.m.capacity) {
    if (c != 1.0) return -kInf;
  }
  std::vector<double> sums(in.nodes, 0.0);
  std::vector<double> fixedLoad(in.nodes, 0.0);
  std::vector<std::vector<std::pair<double, double>>> shed(in.nodes);
  double forcedCost = 0.0;
  for (std::size_t u = 0; u < in.units; ++u) {
    const std::size_t h = in.home[u];
    sums[h] += in.load[u];
    forcedCost += in.minCost[u];
    if (!in.movable(u)) {
      fixedLoad[h] += in.load[u];
      continue;
    }
    if (in.load[u] <= 0.0) continue;
    double away = kInf;
    for (std::size_t i = 0; i < in.nodes; ++i) {
      if (i != h) away = std::min(away, in.c(u, i) - in.c(u, h));
    }
    if (std::isfinite(away)) shed[h].emplace_back(away / in.load[u], in.load[u]);
  }
  for (auto& v : shed) std::sort(v.begin(), v.end());

  double lo = 0.0;
  double hi = std::max(upper, 0.0);
  if (!relaxedFeasible(in, sums, forcedCost, shed, fixedLoad, hi)) {
    hi = in.m.mean;
    if (!relaxedFeasible(in, sums, forcedCost, shed, fixedLoad, hi)) return kInf;
  }
  if (relaxedFeasible(in, sums, forcedCost, shed, fixedLoad, lo)) return lo;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (relaxedFeasible(in, sums, forcedCost, shed, fixedLoad, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

}  // namespace

double relaxationBoundD(const MilpModel& model) {
  const Instance in(model);
  return relaxationBound(in, model.mean);
}

MilpSolution solve(const MilpModel& model) {
  model.config.validate();
  const Deadline deadline(model.config.timeLimit);
  const Instance in(model);

  double forced = 0.0;
  for (std::size_t u = 0; u < in.units; ++u) forced += in.minCost[u];
  if (forced > in.limit + in.budgetTol) {
    throw InfeasibleError("migration budget cannot cover the pinned key groups", kInf);
  }

  const LocalSearch ls(in, deadline);
  State best = ls.initial();
  ls.descend(best, true);
  ls.descend(best, false);
  Rng rng(mixSeed(model.config.seed, 0x4d494c50));
  for (std::size_t kick = 0; kick < model.config.maxKicks && !deadline.expired(); ++kick) {
    State trial = best;
    ls.perturb(trial, rng);
    ls.descend(trial, true);
    ls.descend(trial, false);
    if (better(score(in, trial), score(in, best))) best = std::move(trial);
  }
  ls.cleanup(best);

  std::vector<std::size_t> nodeOfGroup = groupAssignment(in, best);
  ModelEvaluation ev = evaluate(model, nodeOfGroup);
  bool optimal = false;

  if (in.units <= model.config.branchUnitLimit) {
    BranchAndBound bb(in, ev.feasible ? ev.objective : kInf, deadline, model.config.branchNodeLimit);
    const bool complete = bb.run();
    if (bb.found()) {
      nodeOfGroup = bb.best();
      ev = evaluate(model, nodeOfGroup);
    }
    if (complete) {
      if (!ev.feasible) throw InfeasibleError("no allocation satisfies the constraints", kInf);
      optimal = true;
    }
  }

  const double dBound = relaxationBound(in, ev.feasible ? ev.d : model.mean);
  const double relaxedObjective = std::isfinite(dBound) ? in.coeffD * dBound : dBound;
  if (!ev.feasible) {
    throw InfeasibleError("no feasible allocation found", relaxedObjective);
  }

  MilpSolution sol;
  sol.nodeOfGroup = nodeOfGroup;
  sol.objectiveValue = ev.objective;
  sol.optimal = optimal;
  sol.bestBound = optimal ? ev.objective : std::min(ev.objective, relaxedObjective);
  for (std::size_t k = 0; k < model.groups.size(); ++k) {
    const NodeId to = model.nodes[nodeOfGroup[k]];
    sol.plan.assignment.emplace(model.groups[k], to);
    if (nodeOfGroup[k] != model.current[k]) {
      sol.plan.migrations.push_back({model.groups[k], model.nodes[model.current[k]], to});
    }
  }
  sol.plan.objective = {ev.d, ev.du, ev.dl, ev.migrCost};
  sol.solveTime = deadline.elapsed();
  return sol;
}

}  // namespace reconf

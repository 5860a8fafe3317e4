#include "reconf/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "reconf/rng.hpp"

namespace reconf {

void WeightedGraph::addVertex(KeyGroupId v, double weight) {
  if (!(weight >= 0.0)) throw Error("vertex weight must be non-negative");
  vertices[v] = weight;
}

void WeightedGraph::addEdge(KeyGroupId a, KeyGroupId b, double weight) {
  if (a == b) throw Error("self-loop on " + to_string(a));
  if (!vertices.contains(a) || !vertices.contains(b)) throw Error("edge endpoint is not a vertex");
  if (!(weight >= 0.0)) throw Error("edge weight must be non-negative");
  edges[{std::min(a, b), std::max(a, b)}] += weight;
}

double WeightedGraph::totalVertexWeight() const {
  double total = 0.0;
  for (const auto& [v, w] : vertices) total += w;
  return total;
}

void WeightedGraph::validate() const {
  for (const auto& [v, w] : vertices) {
    if (!(w >= 0.0)) throw Error("vertex weight must be non-negative");
  }
  for (const auto& [e, w] : edges) {
    if (!(e.first < e.second)) throw Error("edge must be stored as (smaller, larger) without self-loops");
    if (!vertices.contains(e.first) || !vertices.contains(e.second)) throw Error("edge endpoint is not a vertex");
    if (!(w >= 0.0)) throw Error("edge weight must be non-negative");
  }
}

double cutWeight(const WeightedGraph& graph, const Partition& parts) {
  std::map<KeyGroupId, std::size_t> owner;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (KeyGroupId v : parts[p]) owner[v] = p;
  }
  double cut = 0.0;
  for (const auto& [e, w] : graph.edges) {
    auto a = owner.find(e.first);
    auto b = owner.find(e.second);
    if (a == owner.end() || b == owner.end() || a->second != b->second) cut += w;
  }
  return cut;
}

double partitionCapacity(const WeightedGraph& graph, std::size_t parts, double imbalanceTol) {
  if (parts == 0) throw Error("parts must be at least 1");
  double maxW = 0.0;
  for (const auto& [v, w] : graph.vertices) maxW = std::max(maxW, w);
  const double avg = graph.totalVertexWeight() / static_cast<double>(parts);
  return std::max((1.0 + imbalanceTol) * avg, avg + (1.0 - 1.0 / static_cast<double>(parts)) * maxW);
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

class Partitioner {
 public:
  Partitioner(const WeightedGraph& graph, std::size_t parts, double cap)
      : parts_(parts), cap_(cap + 1e-9 * (1.0 + cap)) {
    for (const auto& [v, w] : graph.vertices) {
      ids_.push_back(v);
      weight_.push_back(w);
    }
    adj_.resize(ids_.size());
    auto index = [&](KeyGroupId v) {
      return static_cast<std::size_t>(std::lower_bound(ids_.begin(), ids_.end(), v) - ids_.begin());
    };
    for (const auto& [e, w] : graph.edges) {
      if (w <= 0.0) continue;
      const std::size_t a = index(e.first);
      const std::size_t b = index(e.second);
      adj_[a].emplace_back(b, w);
      adj_[b].emplace_back(a, w);
    }
    total_ = std::accumulate(weight_.begin(), weight_.end(), 0.0);
  }

  std::size_t size() const { return ids_.size(); }
  KeyGroupId id(std::size_t v) const { return ids_[v]; }

  std::vector<std::size_t> grow(Rng* rng) const {
    const std::size_t n = size();
    std::vector<std::size_t> part(n, kNone);
    std::vector<double> load(parts_, 0.0);
    std::size_t unassigned = n;
    const double target = total_ / static_cast<double>(parts_);

    for (std::size_t p = 0; p < parts_; ++p) {
      const std::size_t reserve = parts_ - p - 1;
      std::size_t seed = kNone;
      if (rng) {
        std::vector<std::size_t> free;
        for (std::size_t v = 0; v < n; ++v) {
          if (part[v] == kNone) free.push_back(v);
        }
        seed = free[rng->below(free.size())];
      } else {
        double bestEdge = -1.0;
        for (std::size_t v = 0; v < n; ++v) {
          if (part[v] != kNone) continue;
          double e = 0.0;
          for (const auto& [u, w] : adj_[v]) {
            if (part[u] == kNone) e = std::max(e, w);
          }
          if (e > bestEdge) {
            bestEdge = e;
            seed = v;
          }
        }
      }
      std::vector<double> conn(n, 0.0);
      auto take = [&](std::size_t v) {
        part[v] = p;
        load[p] += weight_[v];
        --unassigned;
        for (const auto& [u, w] : adj_[v]) conn[u] += w;
      };
      take(seed);
      while (load[p] < target && unassigned > reserve) {
        std::size_t best = kNone;
        for (std::size_t v = 0; v < n; ++v) {
          if (part[v] != kNone || conn[v] <= 0.0 || load[p] + weight_[v] > cap_) continue;
          if (best == kNone || conn[v] > conn[best]) best = v;
        }
        if (best == kNone) break;
        take(best);
      }
    }

    std::vector<std::size_t> rest;
    for (std::size_t v = 0; v < n; ++v) {
      if (part[v] == kNone) rest.push_back(v);
    }
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) { return weight_[a] > weight_[b]; });
    for (std::size_t v : rest) {
      std::vector<double> conn(parts_, 0.0);
      for (const auto& [u, w] : adj_[v]) {
        if (part[u] != kNone) conn[part[u]] += w;
      }
      std::size_t best = kNone;
      for (std::size_t p = 0; p < parts_; ++p) {
        if (load[p] + weight_[v] > cap_) continue;
        if (best == kNone || conn[p] > conn[best] || (conn[p] == conn[best] && load[p] < load[best])) best = p;
      }
      if (best == kNone) best = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
      part[v] = best;
      load[best] += weight_[v];
    }
    return part;
  }

  // Longest-processing-time list scheduling; always within the capacity.
  std::vector<std::size_t> lpt() const {
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weight_[a] > weight_[b]; });
    std::vector<std::size_t> part(size());
    std::vector<double> load(parts_, 0.0);
    std::vector<std::size_t> count(parts_, 0);
    for (std::size_t v : order) {
      std::size_t best = 0;
      for (std::size_t p = 1; p < parts_; ++p) {
        if (load[p] < load[best] || (load[p] == load[best] && count[p] < count[best])) best = p;
      }
      part[v] = best;
      load[best] += weight_[v];
      ++count[best];
    }
    return part;
  }

  bool valid(const std::vector<std::size_t>& part) const {
    std::vector<double> load(parts_, 0.0);
    std::vector<std::size_t> count(parts_, 0);
    for (std::size_t v = 0; v < size(); ++v) {
      load[part[v]] += weight_[v];
      ++count[part[v]];
    }
    for (std::size_t p = 0; p < parts_; ++p) {
      if (count[p] == 0 || load[p] > cap_) return false;
    }
    return true;
  }

  double cut(const std::vector<std::size_t>& part) const {
    double c = 0.0;
    for (std::size_t v = 0; v < size(); ++v) {
      for (const auto& [u, w] : adj_[v]) {
        if (v < u && part[v] != part[u]) c += w;
      }
    }
    return c;
  }

  void refine(std::vector<std::size_t>& part) const {
    for (int pass = 0; pass < 25; ++pass) {
      if (!fmPass(part)) break;
    }
  }

 private:
  // One Fiduccia-Mattheyses pass: move every vertex once in best-gain order,
  // including uphill moves, then roll back to the best prefix.
  bool fmPass(std::vector<std::size_t>& part) const {
    const std::size_t n = size();
    std::vector<double> conn(n * parts_, 0.0);
    std::vector<double> load(parts_, 0.0);
    std::vector<std::size_t> count(parts_, 0);
    for (std::size_t v = 0; v < n; ++v) {
      load[part[v]] += weight_[v];
      ++count[part[v]];
      for (const auto& [u, w] : adj_[v]) conn[u * parts_ + part[v]] += w;
    }
    std::vector<bool> locked(n, false);
    std::vector<std::pair<std::size_t, std::size_t>> moves;  // (vertex, previous part)
    double cum = 0.0;
    double bestCum = 0.0;
    std::size_t bestLen = 0;
    const std::size_t maxSteps = std::min<std::size_t>(n, 400);

    for (std::size_t step = 0; step < maxSteps; ++step) {
      double bestGain = -std::numeric_limits<double>::infinity();
      std::size_t bv = kNone;
      std::size_t bq = kNone;
      for (std::size_t v = 0; v < n; ++v) {
        if (locked[v]) continue;
        const std::size_t own = part[v];
        if (count[own] <= 1) continue;
        for (std::size_t q = 0; q < parts_; ++q) {
          if (q == own || load[q] + weight_[v] > cap_) continue;
          const double gain = conn[v * parts_ + q] - conn[v * parts_ + own];
          if (gain > bestGain) {
            bestGain = gain;
            bv = v;
            bq = q;
          }
        }
      }
      if (bv == kNone) break;
      const std::size_t own = part[bv];
      for (const auto& [u, w] : adj_[bv]) {
        conn[u * parts_ + own] -= w;
        conn[u * parts_ + bq] += w;
      }
      load[own] -= weight_[bv];
      load[bq] += weight_[bv];
      --count[own];
      ++count[bq];
      part[bv] = bq;
      locked[bv] = true;
      moves.emplace_back(bv, own);
      cum += bestGain;
      if (cum > bestCum + 1e-12 * (1.0 + std::abs(bestCum))) {
        bestCum = cum;
        bestLen = moves.size();
      }
    }
    while (moves.size() > bestLen) {
      part[moves.back().first] = moves.back().second;
      moves.pop_back();
    }
    return bestLen > 0;
  }

  std::size_t parts_;
  double cap_;
  double total_ = 0.0;
  std::vector<KeyGroupId> ids_;
  std::vector<double> weight_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj_;
};

}  // namespace

Partition balancedPartition(const WeightedGraph& graph, std::size_t parts, double imbalanceTol,
                            std::uint64_t seed) {
  graph.validate();
  if (parts == 0) throw Error("balancedPartition: parts must be at least 1");
  if (parts > graph.vertices.size()) {
    throw Error("balancedPartition: " + std::to_string(parts) + " parts requested for " +
                std::to_string(graph.vertices.size()) + " vertices");
  }
  if (!(imbalanceTol >= 0.0)) throw Error("balancedPartition: imbalance tolerance must be non-negative");

  const Partitioner pt(graph, parts, partitionCapacity(graph, parts, imbalanceTol));
  const std::size_t n = pt.size();
  std::vector<std::size_t> best;

  if (parts == 1) {
    best.assign(n, 0);
  } else if (parts == n) {
    best.resize(n);
    std::iota(best.begin(), best.end(), 0);
  } else {
    Rng rng(mixSeed(seed, 0x50415254));
    double bestCut = std::numeric_limits<double>::infinity();
    const int restarts = 8;
    for (int r = 0; r < restarts; ++r) {
      std::vector<std::size_t> part = r == 0 ? pt.grow(nullptr) : r == 1 ? pt.lpt() : pt.grow(&rng);
      if (!pt.valid(part)) part = pt.lpt();
      pt.refine(part);
      const double c = pt.cut(part);
      if (best.empty() || c < bestCut - 1e-12 * (1.0 + bestCut)) {
        bestCut = c;
        best = std::move(part);
      }
    }
  }

  Partition out(parts);
  for (std::size_t v = 0; v < n; ++v) out[best[v]].push_back(pt.id(v));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace reconf

#include <gtest/gtest.h>

#include <set>

#include "reconf/partition.hpp"
#include "reconf/rng.hpp"

using namespace reconf;

namespace {

KeyGroupId v(std::uint32_t i) { return KeyGroupId{i}; }

WeightedGraph fourChain() {
  WeightedGraph g;
  for (std::uint32_t i = 0; i < 4; ++i) g.addVertex(v(i), 1.0);
  g.addEdge(v(0), v(1), 10.0);
  g.addEdge(v(2), v(3), 10.0);
  g.addEdge(v(1), v(2), 1.0);
  return g;
}

void expectValid(const WeightedGraph& g, const Partition& p, std::size_t parts) {
  ASSERT_EQ(p.size(), parts);
  std::set<KeyGroupId> seen;
  for (const auto& part : p) {
    EXPECT_FALSE(part.empty());
    for (KeyGroupId x : part) EXPECT_TRUE(seen.insert(x).second);
  }
  EXPECT_EQ(seen.size(), g.vertices.size());
}

}  // namespace

TEST(BalancedPartition, SplitsAlongTheWeakEdge) {
  const auto g = fourChain();
  const auto p = balancedPartition(g, 2);
  expectValid(g, p, 2);
  EXPECT_DOUBLE_EQ(cutWeight(g, p), 1.0);
  EXPECT_EQ(p[0], (std::vector<KeyGroupId>{v(0), v(1)}));
  EXPECT_EQ(p[1], (std::vector<KeyGroupId>{v(2), v(3)}));
}

TEST(BalancedPartition, OnePartAndSingletons) {
  const auto g = fourChain();
  const auto whole = balancedPartition(g, 1);
  expectValid(g, whole, 1);
  EXPECT_DOUBLE_EQ(cutWeight(g, whole), 0.0);
  const auto singles = balancedPartition(g, 4);
  expectValid(g, singles, 4);
  EXPECT_DOUBLE_EQ(cutWeight(g, singles), 21.0);
}

TEST(BalancedPartition, RejectsBadArguments) {
  const auto g = fourChain();
  EXPECT_THROW(balancedPartition(g, 0), Error);
  EXPECT_THROW(balancedPartition(g, 5), Error);
  WeightedGraph bad;
  bad.addVertex(v(0), 1.0);
  EXPECT_THROW(bad.addEdge(v(0), v(9), 1.0), Error);
}

TEST(BalancedPartition, RandomGraphsStayValidAndWithinCapacity) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    WeightedGraph g;
    const std::size_t n = 3 + rng.below(15);
    for (std::uint32_t i = 0; i < n; ++i) g.addVertex(v(i), 1.0 + static_cast<double>(rng.below(9)));
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) {
        if (rng.below(3) == 0) g.addEdge(v(i), v(j), 1.0 + static_cast<double>(rng.below(20)));
      }
    }
    const std::size_t parts = 1 + rng.below(std::min<std::size_t>(n, 5));
    const auto p = balancedPartition(g, parts, 0.1, static_cast<std::uint64_t>(t));
    expectValid(g, p, parts);
    const double cap = partitionCapacity(g, parts, 0.1);
    for (const auto& part : p) {
      double w = 0.0;
      for (KeyGroupId x : part) w += g.vertices.at(x);
      EXPECT_LE(w, cap * (1 + 1e-9));
    }
    EXPECT_EQ(p, balancedPartition(g, parts, 0.1, static_cast<std::uint64_t>(t)));
  }
}

TEST(PartitionCapacity, WidensForHeavyVertices) {
  WeightedGraph g;
  g.addVertex(v(0), 10.0);
  g.addVertex(v(1), 1.0);
  g.addVertex(v(2), 1.0);
  EXPECT_DOUBLE_EQ(partitionCapacity(g, 2, 0.1), 6.0 + 0.5 * 10.0);
  EXPECT_DOUBLE_EQ(partitionCapacity(fourChain(), 2, 0.1), 2.5);
}

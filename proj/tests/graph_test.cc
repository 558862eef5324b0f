#include "ewgsl/graph.h"

#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "oracles.h"

namespace ewgsl {
namespace {

TEST(WeightedGraphTest, StoresEachEdgeOncePerDirection) {
  const std::vector<Edge> edges = {{0, 1, 2.0}};
  const auto g = WeightedGraph::FromEdges(2, edges);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_DOUBLE_EQ(g.Weight(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(g.Weight(1, 0), 2.0);
  ASSERT_EQ(g.Neighbors(1).size(), 1u);
  EXPECT_EQ(g.Neighbors(1)[0], 0);
}

TEST(WeightedGraphTest, RejectsNonPositiveWeight) {
  const std::vector<Edge> edges = {{0, 1, -1.0}};
  try {
    WeightedGraph::FromEdges(2, edges);
    FAIL() << "expected GraphError";
  } catch (const GraphError& e) {
    EXPECT_NE(std::string(e.what()).find("non-positive weight"), std::string::npos);
  }
  const std::vector<Edge> zero = {{0, 1, 0.0}};
  EXPECT_THROW(WeightedGraph::FromEdges(2, zero), GraphError);
  const std::vector<Edge> nan = {{0, 1, std::nan("")}};
  EXPECT_THROW(WeightedGraph::FromEdges(2, nan), GraphError);
}

TEST(WeightedGraphTest, RejectsOutOfRangeIds) {
  const std::vector<Edge> edges = {{0, 2, 1.0}};
  EXPECT_THROW(WeightedGraph::FromEdges(2, edges), GraphError);
  const std::vector<Edge> negative = {{-1, 0, 1.0}};
  EXPECT_THROW(WeightedGraph::FromEdges(2, negative), GraphError);
}

TEST(WeightedGraphTest, DeduplicatesBothDirections) {
  const std::vector<Edge> edges = {{0, 1, 2.0}, {1, 0, 2.0}};
  const auto g = WeightedGraph::FromEdges(2, edges);
  EXPECT_EQ(g.num_edges(), 1u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1, 2.0}));
}

TEST(WeightedGraphTest, DirectedInputKeepsMaxWeight) {
  const std::vector<Edge> edges = {{0, 1, 2.0}, {1, 0, 5.0}};
  EXPECT_DOUBLE_EQ(WeightedGraph::FromEdges(2, edges).Weight(0, 1), 5.0);
}

TEST(WeightedGraphTest, FlagsIsolatedNodes) {
  const std::vector<Edge> edges = {{0, 2, 1.0}};
  const auto g = WeightedGraph::FromEdges(4, edges);
  EXPECT_EQ(g.IsolatedNodes(), (std::vector<NodeId>{1, 3}));
}

TEST(WeightedGraphTest, NeighborListsSortedAndSymmetric) {
  std::mt19937_64 rng(3);
  const auto g = oracle::RandomGraph(25, 0.3, 9, rng);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    const auto nb = g.Neighbors(i);
    EXPECT_TRUE(std::is_sorted(nb.begin(), nb.end()));
    for (std::size_t k = 0; k < nb.size(); ++k) {
      EXPECT_GT(g.NeighborWeights(i)[k], 0.0);
      EXPECT_DOUBLE_EQ(g.Weight(nb[k], i), g.NeighborWeights(i)[k]);
    }
  }
}

WeightedGraph Star() {
  // Node 0 has neighbors weighted 2, 3, 5; node 4 is isolated.
  const std::vector<Edge> edges = {{0, 1, 2.0}, {0, 2, 3.0}, {0, 3, 5.0}};
  return WeightedGraph::FromEdges(5, edges);
}

TEST(SelfLoopTest, ModesFollowNeighborWeights) {
  EXPECT_DOUBLE_EQ(AssignSelfLoopWeights(Star(), SelfLoopMode::kMax).SelfLoopWeight(0), 5.0);
  EXPECT_DOUBLE_EQ(AssignSelfLoopWeights(Star(), SelfLoopMode::kMin).SelfLoopWeight(0), 2.0);
  EXPECT_DOUBLE_EQ(AssignSelfLoopWeights(Star(), SelfLoopMode::kAvg).SelfLoopWeight(0),
                   10.0 / 3.0);
}

TEST(SelfLoopTest, IsolatedNodeGetsUnitWeight) {
  for (auto mode : {SelfLoopMode::kMax, SelfLoopMode::kMin, SelfLoopMode::kAvg}) {
    EXPECT_DOUBLE_EQ(AssignSelfLoopWeights(Star(), mode).SelfLoopWeight(4), 1.0);
  }
}

TEST(SelfLoopTest, ModesOrdered) {
  std::mt19937_64 rng(11);
  const auto g = oracle::RandomGraph(40, 0.2, 20, rng);
  const auto mn = AssignSelfLoopWeights(g, SelfLoopMode::kMin);
  const auto av = AssignSelfLoopWeights(g, SelfLoopMode::kAvg);
  const auto mx = AssignSelfLoopWeights(g, SelfLoopMode::kMax);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    EXPECT_LE(mn.SelfLoopWeight(i), av.SelfLoopWeight(i) + 1e-12);
    EXPECT_LE(av.SelfLoopWeight(i), mx.SelfLoopWeight(i) + 1e-12);
  }
}

TEST(SelfLoopTest, ModeNamesRoundTrip) {
  for (auto mode : {SelfLoopMode::kMax, SelfLoopMode::kMin, SelfLoopMode::kAvg}) {
    EXPECT_EQ(ParseSelfLoopMode(SelfLoopModeName(mode)), mode);
  }
  EXPECT_THROW(ParseSelfLoopMode("median"), std::invalid_argument);
}

TEST(ImpactFactorsTest, HeaviestOfTwoThreeFiveIsHalf) {
  const auto rho = BuildImpactFactors(AssignSelfLoopWeights(Star(), SelfLoopMode::kMax));
  EXPECT_DOUBLE_EQ(rho.At(0, 3), 0.5);
  EXPECT_DOUBLE_EQ(rho.At(0, 1), 0.2);
  EXPECT_DOUBLE_EQ(rho.At(0, 0), 0.5);  // w_00 = 5 over the same denominator
}

TEST(ImpactFactorsTest, EqualWeightsSplitEvenly) {
  const std::vector<Edge> edges = {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {0, 4, 1.0}};
  const auto rho = BuildImpactFactors(
      AssignSelfLoopWeights(WeightedGraph::FromEdges(5, edges), SelfLoopMode::kMax));
  for (NodeId j = 1; j <= 4; ++j) EXPECT_DOUBLE_EQ(rho.At(0, j), 0.25);
}

TEST(ImpactFactorsTest, SingleNeighbor) {
  const std::vector<Edge> edges = {{0, 1, 7.0}};
  const auto g = AssignSelfLoopWeights(WeightedGraph::FromEdges(2, edges), SelfLoopMode::kAvg);
  const auto rho = BuildImpactFactors(g);
  EXPECT_DOUBLE_EQ(rho.At(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(rho.At(0, 0), g.SelfLoopWeight(0) / 7.0);
}

TEST(ImpactFactorsTest, IsolatedNodeAttendsToItself) {
  const auto rho = BuildImpactFactors(AssignSelfLoopWeights(Star(), SelfLoopMode::kMax));
  EXPECT_EQ(rho.RowEnd(4) - rho.RowBegin(4), 1u);
  EXPECT_DOUBLE_EQ(rho.At(4, 4), 1.0);
}

TEST(ImpactFactorsTest, RequiresSelfLoops) {
  EXPECT_THROW(BuildImpactFactors(Star()), GraphError);
}

TEST(ImpactFactorsTest, MatchesDenseOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = oracle::RandomGraph(15, 0.25, 10, rng);
    for (auto mode : {SelfLoopMode::kMax, SelfLoopMode::kMin, SelfLoopMode::kAvg}) {
      const auto rho = BuildImpactFactors(AssignSelfLoopWeights(g, mode));
      const auto dense = oracle::DenseRho(g, mode);
      for (NodeId i = 0; i < g.num_nodes(); ++i) {
        for (NodeId j = 0; j < g.num_nodes(); ++j) {
          EXPECT_NEAR(rho.At(i, j), dense[i][j], 1e-15);
        }
      }
    }
  }
}

TEST(ImpactFactorsTest, RowsStochasticExcludingSelf) {
  std::mt19937_64 rng(8);
  const auto g = AssignSelfLoopWeights(oracle::RandomGraph(50, 0.15, 30, rng), SelfLoopMode::kMax);
  const auto rho = BuildImpactFactors(g);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    if (g.Degree(i) == 0) continue;
    double sum = 0;
    for (NodeId j : g.Neighbors(i)) sum += rho.At(i, j);
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(ImpactFactorsTest, ScaleInvariant) {
  std::mt19937_64 rng(9);
  const auto g = oracle::RandomGraph(30, 0.2, 15, rng);
  for (double gamma : {1e-3, 0.7, 3.0, 1e4}) {
    std::vector<Edge> scaled = g.edges();
    for (auto& e : scaled) e.weight *= gamma;
    const auto a = BuildImpactFactors(AssignSelfLoopWeights(g, SelfLoopMode::kAvg));
    const auto b = BuildImpactFactors(
        AssignSelfLoopWeights(WeightedGraph::FromEdges(g.num_nodes(), scaled), SelfLoopMode::kAvg));
    ASSERT_EQ(a.cols, b.cols);
    for (std::size_t k = 0; k < a.rho.size(); ++k) EXPECT_NEAR(a.rho[k], b.rho[k], 1e-12);
  }
}

TEST(ImpactFactorsTest, PatternNeverInventsEdges) {
  std::mt19937_64 rng(10);
  const auto g = AssignSelfLoopWeights(oracle::RandomGraph(20, 0.2, 5, rng), SelfLoopMode::kMax);
  const auto rho = BuildImpactFactors(g);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    ASSERT_EQ(rho.cols[rho.RowBegin(i)], i);
    for (std::size_t k = rho.RowBegin(i) + 1; k < rho.RowEnd(i); ++k) {
      EXPECT_TRUE(g.HasEdge(i, rho.cols[k]));
      EXPECT_GT(rho.rho[k], 0.0);
    }
  }
}

TEST(ImpactFactorsTest, UniformIsAllOnes) {
  const auto rho = UniformImpactFactors(AssignSelfLoopWeights(Star(), SelfLoopMode::kMax));
  for (double r : rho.rho) EXPECT_EQ(r, 1.0);
}

// Integer-arithmetic ceiling, independent of the floating-point formula.
std::size_t CeilPercent(std::size_t edges, int percent) {
  return (edges * percent + 99) / 100;
}

TEST(NoiseTest, AddsExactCountWithoutDuplicates) {
  std::vector<Edge> edges;
  for (int i = 0; i < 100; ++i) edges.push_back({i, (i + 1) % 101, 1.0 + i % 7});
  const auto g = WeightedGraph::FromEdges(101, edges);
  ASSERT_EQ(g.num_edges(), 100u);
  const auto noisy = InjectNoiseEdges(g, 0.10, 1);
  EXPECT_EQ(noisy.num_edges(), 110u);
  for (const auto& e : g.edges()) EXPECT_DOUBLE_EQ(noisy.Weight(e.u, e.v), e.weight);
}

TEST(NoiseTest, CountsMatchIntegerCeiling) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::RandomGraph(60, 0.1, 8, rng);
    for (int pct : {5, 10, 15}) {
      const auto noisy = InjectNoiseEdges(g, pct / 100.0, trial);
      EXPECT_EQ(noisy.num_edges() - g.num_edges(), CeilPercent(g.num_edges(), pct));
      EXPECT_EQ(NoiseEdgeCount(g.num_edges(), pct / 100.0), CeilPercent(g.num_edges(), pct));
    }
  }
}

TEST(NoiseTest, ZeroFractionIsIdentity) {
  std::mt19937_64 rng(13);
  const auto g = oracle::RandomGraph(20, 0.2, 5, rng);
  EXPECT_EQ(InjectNoiseEdges(g, 0.0, 42), g);
}

TEST(NoiseTest, NewWeightsComeFromExistingMultiset) {
  std::mt19937_64 rng(14);
  const auto g = oracle::RandomGraph(40, 0.1, 50, rng);
  std::set<double> seen;
  for (const auto& e : g.edges()) seen.insert(e.weight);
  const auto noisy = InjectNoiseEdges(g, 0.15, 3);
  for (const auto& e : noisy.edges()) {
    if (!g.HasEdge(e.u, e.v)) {
      EXPECT_TRUE(seen.count(e.weight)) << e.weight;
    }
  }
}

TEST(NoiseTest, DeterministicPerSeed) {
  std::mt19937_64 rng(15);
  const auto g = oracle::RandomGraph(30, 0.2, 5, rng);
  EXPECT_EQ(InjectNoiseEdges(g, 0.1, 77), InjectNoiseEdges(g, 0.1, 77));
  EXPECT_FALSE(InjectNoiseEdges(g, 0.1, 77) == InjectNoiseEdges(g, 0.1, 78));
}

TEST(NoiseTest, DenseGraphUsesEnumerationPath) {
  // 8 nodes, 24 of 28 pairs taken: 4 free pairs, fraction asks for all of them.
  std::vector<Edge> edges;
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j < 8; ++j)
      if (!((i == 0 && j == 1) || (i == 2 && j == 3) || (i == 4 && j == 5) || (i == 6 && j == 7)))
        edges.push_back({i, j, 1.0});
  const auto g = WeightedGraph::FromEdges(8, edges);
  const auto noisy = InjectNoiseEdges(g, 4.0 / 24.0, 2);
  EXPECT_EQ(noisy.num_edges(), 28u);
  EXPECT_THROW(InjectNoiseEdges(g, 0.25, 2), GraphError);
}

TEST(NoiseTest, RejectsBadFraction) {
  EXPECT_THROW(InjectNoiseEdges(Star(), -0.1, 0), GraphError);
  EXPECT_THROW(InjectNoiseEdges(Star(), 1.5, 0), GraphError);
}

TEST(NoiseTest, EndpointsUniformOverNonEdges) {
  // 30-node ring: every non-edge pair should be drawn equally often.
  std::vector<Edge> edges;
  for (int i = 0; i < 30; ++i) edges.push_back({i, (i + 1) % 30, 1.0});
  const auto g = WeightedGraph::FromEdges(30, edges);
  std::map<std::pair<int, int>, int> counts;
  for (int i = 0; i < 30; ++i)
    for (int j = i + 1; j < 30; ++j)
      if (!g.HasEdge(i, j)) counts[{i, j}] = 0;
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto noisy = InjectNoiseEdges(g, 0.5, seed);
    for (const auto& e : noisy.edges()) {
      if (g.HasEdge(e.u, e.v)) continue;
      ++counts.at({e.u, e.v});
      ++total;
    }
  }
  const double expected = static_cast<double>(total) / counts.size();
  double chi2 = 0;
  for (const auto& [pair, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
  const double p_value = 1.0 - boost::math::cdf(dist, chi2);
  EXPECT_GT(p_value, 0.01) << "chi2=" << chi2 << " cells=" << counts.size();
}

}  // namespace
}  // namespace ewgsl

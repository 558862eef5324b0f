#include "ewgsl/dataset.h"

#include <gtest/gtest.h>

#include <cmath>

#include "ewgsl/io.h"
#include "test_util.h"

namespace ewgsl {
namespace {

using testing::ItemLine;
using testing::TempDir;
using testing::WriteText;

constexpr int kAction = 1, kComedy = 5, kDrama = 8;

struct Fixture {
  std::filesystem::path ratings, items;
};

// Movies: 1 {Comedy, Drama}, 2 {Drama}, 3 {Action}, 4 {}, 5 {Drama, never rated}.
// User 1 rates 2 (t=5), 1 (t=10), 3 (t=20): edges 2-1, 1-3.
// User 2 rates 4 (t=3), then 1 and 2 both at t=7 (item order): edges 4-1, 1-2.
// User 3 rates a single movie.
Fixture SmallMovieLens(const std::filesystem::path& dir) {
  Fixture f{dir / "u.data", dir / "u.item"};
  WriteText(f.ratings,
            "1\t1\t4\t10\n1\t2\t3\t5\n1\t3\t5\t20\n"
            "2\t2\t1\t7\n2\t1\t2\t7\n2\t4\t5\t3\n"
            "3\t3\t4\t1\n");
  WriteText(f.items, ItemLine(1, {kComedy, kDrama}) + ItemLine(2, {kDrama}) +
                         ItemLine(3, {kAction}) + ItemLine(4, {}) + ItemLine(5, {kDrama}));
  return f;
}

TEST(Ml100kTest, ConsecutiveRatingsBuildWeightedEdges) {
  const auto f = SmallMovieLens(TempDir());
  Ml100kStats stats;
  const auto data = BuildMl100kGraph(f.ratings, f.items, {.max_classes = 0}, &stats);
  // Nodes are movies 1..4 in id order; movie 5 has no edges and is dropped.
  ASSERT_EQ(data.graph.num_nodes(), 4);
  EXPECT_EQ(stats.node_items, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(data.graph.num_edges(), 3u);
  EXPECT_DOUBLE_EQ(data.graph.Weight(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(data.graph.Weight(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(data.graph.Weight(0, 3), 1.0);
  EXPECT_FALSE(data.graph.HasEdge(1, 2));
  // Drama (3 movies) beats Comedy (1) for movie 1; classes compact in genre order.
  EXPECT_EQ(stats.class_genres, (std::vector<int>{0, kAction, kDrama}));
  EXPECT_EQ(data.labels.labels, (std::vector<int>{2, 2, 1, 0}));
  EXPECT_EQ(data.labels.num_classes, 3);
  EXPECT_EQ(stats.num_ratings, 7u);
  EXPECT_EQ(stats.num_users, 3u);
}

TEST(Ml100kTest, ClassCapKeepsMostPopulousClasses) {
  const auto f = SmallMovieLens(TempDir());
  Ml100kStats stats;
  const auto data = BuildMl100kGraph(f.ratings, f.items, {.max_classes = 2}, &stats);
  // Drama (2 nodes) plus the lower-index of the tied singletons (unknown).
  EXPECT_EQ(stats.class_genres, (std::vector<int>{0, kDrama}));
  EXPECT_EQ(stats.node_items, (std::vector<int>{1, 2, 4}));
  EXPECT_EQ(data.labels.labels, (std::vector<int>{1, 1, 0}));
  EXPECT_EQ(data.graph.num_edges(), 2u);
}

TEST(Ml100kTest, SingleRatingUserAddsNothing) {
  const auto dir = TempDir();
  WriteText(dir / "u.data", "1\t1\t4\t10\n");
  WriteText(dir / "u.item", ItemLine(1, {kDrama}));
  const auto data = BuildMl100kGraph(dir / "u.data", dir / "u.item");
  EXPECT_EQ(data.graph.num_nodes(), 0);
  EXPECT_EQ(data.graph.num_edges(), 0u);
}

TEST(Ml100kTest, MalformedLineReportsLocation) {
  const auto dir = TempDir();
  WriteText(dir / "u.data", "1\t1\t4\t10\n1\t2\tfour\t11\n");
  WriteText(dir / "u.item", ItemLine(1, {kDrama}) + ItemLine(2, {kDrama}));
  try {
    BuildMl100kGraph(dir / "u.data", dir / "u.item");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("u.data:2"), std::string::npos) << e.what();
  }
  WriteText(dir / "u.data", "1\t1\t4\n");
  EXPECT_THROW(BuildMl100kGraph(dir / "u.data", dir / "u.item"), ParseError);
  WriteText(dir / "u.data", "1\t1\t4\t10\n");
  WriteText(dir / "u.item", "1|short|0|1\n");
  EXPECT_THROW(BuildMl100kGraph(dir / "u.data", dir / "u.item"), ParseError);
}

TEST(Ml100kTest, Deterministic) {
  const auto f = SmallMovieLens(TempDir());
  const auto a = BuildMl100kGraph(f.ratings, f.items);
  const auto b = BuildMl100kGraph(f.ratings, f.items);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(SyntheticTest, NoInterEdgesWhenInterProbabilityZero) {
  SyntheticSpec spec;
  spec.inter_p = 0.0;
  const auto data = GenerateSyntheticGraph(spec);
  for (const auto& e : data.graph.edges()) {
    EXPECT_EQ(data.labels.labels[e.u], data.labels.labels[e.v]);
  }
}

TEST(SyntheticTest, EdgeCountWithinThreeSigma) {
  SyntheticSpec spec;  // 200 nodes, 4 blocks of 50
  const double intra_pairs = 4 * 50.0 * 49 / 2;
  const double inter_pairs = 200.0 * 199 / 2 - intra_pairs;
  const double mean = intra_pairs * 0.2 + inter_pairs * 0.02;
  const double sd = std::sqrt(intra_pairs * 0.2 * 0.8 + inter_pairs * 0.02 * 0.98);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.seed = seed;
    const double m = static_cast<double>(GenerateSyntheticGraph(spec).graph.num_edges());
    EXPECT_LT(std::abs(m - mean), 3 * sd) << "seed " << seed;
  }
}

TEST(SyntheticTest, IntraWeightsHeavier) {
  SyntheticSpec spec;
  spec.seed = 4;
  const auto data = GenerateSyntheticGraph(spec);
  double si = 0, sx = 0, qi = 0, qx = 0;
  int ni = 0, nx = 0;
  for (const auto& e : data.graph.edges()) {
    if (data.labels.labels[e.u] == data.labels.labels[e.v]) {
      si += e.weight, qi += e.weight * e.weight, ++ni;
    } else {
      sx += e.weight, qx += e.weight * e.weight, ++nx;
    }
  }
  const double mi = si / ni, mx = sx / nx;
  const double se = std::sqrt((qi / ni - mi * mi) / ni + (qx / nx - mx * mx) / nx);
  EXPECT_GT(mi - mx, 3 * se);
}

TEST(SyntheticTest, BlocksNearEqual) {
  SyntheticSpec spec;
  spec.num_nodes = 10;
  spec.num_classes = 3;
  spec.intra_p = 0.9;
  const auto data = GenerateSyntheticGraph(spec);
  std::vector<int> size(3, 0);
  for (int y : data.labels.labels) ++size[y];
  for (int s : size) EXPECT_TRUE(s == 3 || s == 4);
}

TEST(SyntheticTest, DeterministicPerSeed) {
  SyntheticSpec spec;
  spec.seed = 9;
  EXPECT_EQ(GenerateSyntheticGraph(spec).graph, GenerateSyntheticGraph(spec).graph);
}

TEST(SyntheticTest, RejectsInvalidSpecs) {
  SyntheticSpec spec;
  spec.intra_p = 0.01;
  spec.inter_p = 0.02;
  EXPECT_THROW(GenerateSyntheticGraph(spec), std::invalid_argument);
  spec.num_nodes = 4;
  spec.intra_p = 1e-12;
  spec.inter_p = 0.0;
  try {
    GenerateSyntheticGraph(spec);
    FAIL() << "expected an empty-graph error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("empty graph"), std::string::npos);
  }
}

LabelSet Balanced(int n, int c) {
  LabelSet ls;
  ls.num_classes = c;
  for (int i = 0; i < n; ++i) ls.labels.push_back(i % c);
  return ls;
}

TEST(SplitTest, HundredNodesTenPercent) {
  const auto split = SplitLabels(Balanced(100, 4), 0.1, 1);
  EXPECT_EQ(split.NumLabeled(), 10u);
  std::vector<int> per_class(4, 0);
  for (NodeId i : split.LabeledNodes()) ++per_class[split.labels[i]];
  for (int k : per_class) EXPECT_GE(k, 1);
}

TEST(SplitTest, MasksPartitionNodes) {
  const auto split = SplitLabels(Balanced(37, 5), 0.3, 2);
  EXPECT_EQ(split.LabeledNodes().size() + split.UnlabeledNodes().size(), 37u);
}

TEST(SplitTest, FractionMustBeOpenInterval) {
  EXPECT_THROW(SplitLabels(Balanced(10, 2), 1.0, 0), std::invalid_argument);
  EXPECT_THROW(SplitLabels(Balanced(10, 2), 0.0, 0), std::invalid_argument);
}

TEST(SplitTest, EmptyClassRejected) {
  LabelSet ls = Balanced(10, 2);
  ls.num_classes = 3;
  EXPECT_THROW(SplitLabels(ls, 0.5, 0), std::invalid_argument);
}

TEST(SplitTest, SmallClassStillLabeled) {
  LabelSet ls = Balanced(100, 2);
  ls.labels[0] = 2;  // a class with a single member
  ls.num_classes = 3;
  const auto split = SplitLabels(ls, 0.05, 3);
  EXPECT_TRUE(split.IsLabeled(0));
}

TEST(SplitTest, DeterministicPerSeed) {
  EXPECT_EQ(SplitLabels(Balanced(80, 4), 0.2, 5), SplitLabels(Balanced(80, 4), 0.2, 5));
  EXPECT_NE(SplitLabels(Balanced(80, 4), 0.2, 5).labeled,
            SplitLabels(Balanced(80, 4), 0.2, 6).labeled);
}

}  // namespace
}  // namespace ewgsl

#include "fsg/modularity.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "fsg/graph.hpp"
#include "fsg/random.hpp"
#include "oracles.hpp"

using fsg::build_graph;
using fsg::Decision;
using fsg::detect_modularity;
using fsg::fast_greedy;
using fsg::localize_modularity;
using fsg::Matrix;
using fsg::ModularityResult;
using fsg::modularity_q;
using fsg::Partition;
using fsg::Rng;
using fsg::save_merge_trace_tsv;
using fsg::SimilarityGraph;
using fsg::SimilarityMatrix;

namespace {

SimilarityGraph graph_from(const Matrix& weights, double threshold = 0.0) {
  SimilarityMatrix s;
  s.n = weights.rows();
  s.values = weights;
  return build_graph(s, threshold);
}

Matrix clique_blocks(const std::vector<int>& sizes, double inside, double outside) {
  int n = 0;
  for (int s : sizes) n += s;
  Matrix w(n, n, 0.0);
  std::vector<int> block_of(static_cast<size_t>(n));
  int v = 0;
  for (size_t b = 0; b < sizes.size(); ++b)
    for (int k = 0; k < sizes[b]; ++k) block_of[static_cast<size_t>(v++)] = static_cast<int>(b);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        w(i, j) = block_of[static_cast<size_t>(i)] == block_of[static_cast<size_t>(j)] ? inside
                                                                                       : outside;
  return w;
}

Matrix random_weights(int n, uint64_t seed, double density = 0.7) {
  Matrix w(n, n, 0.0);
  Rng rng(seed);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < density) {
        const double v = 0.05 + 0.9 * rng.uniform();
        w(i, j) = v;
        w(j, i) = v;
      }
  return w;
}

bool has_edges(const Matrix& w) {
  for (int i = 0; i < w.rows(); ++i)
    for (int j = i + 1; j < w.rows(); ++j)
      if (w(i, j) > 0.0) return true;
  return false;
}

TEST(ModularityQ, SingleCommunityIsZero) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Matrix w = random_weights(9, seed);
    if (!has_edges(w)) continue;
    SimilarityGraph g = graph_from(w);
    std::vector<int> labels(9, 1);
    EXPECT_LE(std::fabs(modularity_q(g, labels)), 1e-12);
  }
}

TEST(ModularityQ, TwoDisjointCliquesSplitScoresQuarter) {
  SimilarityGraph g = graph_from(clique_blocks({4, 4}, 1.0, 0.0));
  std::vector<int> labels{1, 1, 1, 1, 2, 2, 2, 2};
  EXPECT_NEAR(modularity_q(g, labels), 0.25, 1e-12);
}

TEST(ModularityQ, SingleEdgeOneCommunityIsZero) {
  Matrix w(2, 2, 0.0);
  w(0, 1) = w(1, 0) = 0.8;
  EXPECT_LE(std::fabs(modularity_q(graph_from(w), std::vector<int>{1, 1})), 1e-12);
}

TEST(ModularityQ, MatchesDirectFormulaOnRandomPartitions) {
  Rng rng(33);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(8));
    Matrix w = random_weights(n, 100 + static_cast<uint64_t>(trial));
    if (!has_edges(w)) continue;
    SimilarityGraph g = graph_from(w);
    std::vector<int> labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = static_cast<int>(rng.uniform_int(3));
    EXPECT_NEAR(modularity_q(g, labels), oracle::modularity_reference(w, labels), 1e-12);
  }
}

TEST(ModularityQ, InvariantToWeightScaling) {
  Matrix w = random_weights(10, 7);
  // modularity is scale-free; compare against a growing variant of the graph
  SimilarityGraph g1 = graph_from(w);
  Matrix w2 = w;
  for (double& v : w2.data()) v *= 0.35;  // stay inside [0,1]
  SimilarityGraph g2 = graph_from(w2);
  Rng rng(8);
  std::vector<int> labels(10);
  for (int& l : labels) l = static_cast<int>(rng.uniform_int(4));
  EXPECT_NEAR(modularity_q(g1, labels), modularity_q(g2, labels), 1e-10);
}

TEST(ModularityQ, EdgelessGraphIsUndefined) {
  SimilarityGraph g = graph_from(Matrix(4, 4, 0.0));
  EXPECT_THROW(modularity_q(g, std::vector<int>(4, 1)), std::domain_error);
}

TEST(ModularityQ, RejectsLabelCountMismatch) {
  SimilarityGraph g = graph_from(clique_blocks({3}, 1.0, 1.0));
  EXPECT_THROW(modularity_q(g, std::vector<int>{1, 1}), std::invalid_argument);
}

TEST(FastGreedy, RecoversTwoDisjointCliques) {
  SimilarityGraph g = graph_from(clique_blocks({4, 4}, 1.0, 0.0));
  ModularityResult r = fast_greedy(g);
  EXPECT_NEAR(r.q_opt, 0.25, 1e-12);
  EXPECT_EQ(r.partition.k, 2);
  std::vector<int> truth{0, 0, 0, 0, 1, 1, 1, 1};
  EXPECT_TRUE(oracle::same_grouping(r.partition.labels, truth));
  EXPECT_EQ(r.merge_trace.size(), 7u);  // n-1 merges to a single community
  EXPECT_EQ(r.partition.score, r.q_opt);
}

TEST(FastGreedy, CompleteGraphHasNoCommunityStructure) {
  SimilarityGraph g = graph_from(clique_blocks({5}, 1.0, 1.0));
  ModularityResult r = fast_greedy(g);
  // the single-community cut is optimal and its modularity is exactly zero
  EXPECT_LE(std::fabs(r.q_opt), 1e-12);
  EXPECT_EQ(r.partition.k, 1);
}

TEST(FastGreedy, RecoversPlantedBlocksWithCrossTalk) {
  SimilarityGraph g = graph_from(clique_blocks({4, 4}, 0.9, 0.1));
  ModularityResult r = fast_greedy(g);
  std::vector<int> truth{0, 0, 0, 0, 1, 1, 1, 1};
  EXPECT_TRUE(oracle::same_grouping(r.partition.labels, truth));
}

TEST(FastGreedy, NeverBeatsExhaustiveSearch) {
  Rng rng(55);
  int tested = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(6));  // 3..8
    Matrix w = random_weights(n, 500 + static_cast<uint64_t>(trial),
                              trial % 2 ? 0.45 : 0.9);
    if (!has_edges(w)) continue;
    ++tested;
    SimilarityGraph g = graph_from(w);
    ModularityResult r = fast_greedy(g);
    const double best = oracle::max_modularity_exhaustive(w);
    EXPECT_LE(r.q_opt, best + 1e-12) << "n=" << n << " trial=" << trial;
    // the reported optimum must be reproduced by its own partition
    EXPECT_NEAR(modularity_q(g, r.partition), r.q_opt, 1e-12);
  }
  EXPECT_GE(tested, 30);
}

TEST(FastGreedy, AttainsExhaustiveOptimumOnPlantedCliques) {
  for (const std::vector<int>& sizes : {std::vector<int>{3, 3}, std::vector<int>{4, 4}}) {
    Matrix w = clique_blocks(sizes, 1.0, 0.0);
    ModularityResult r = fast_greedy(graph_from(w));
    EXPECT_NEAR(r.q_opt, oracle::max_modularity_exhaustive(w), 1e-12);
  }
}

TEST(FastGreedy, TraceModularityMatchesDirectEvaluation) {
  Rng rng(66);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 8 + static_cast<int>(rng.uniform_int(23));  // 8..30
    Matrix w = random_weights(n, 700 + static_cast<uint64_t>(trial));
    if (!has_edges(w)) continue;
    SimilarityGraph g = graph_from(w);
    ModularityResult r = fast_greedy(g);
    ASSERT_EQ(r.merge_trace.size(), static_cast<size_t>(n - 1));
    // incremental Q values must agree with the direct formula at every step
    for (size_t s = 1; s <= r.merge_trace.size(); ++s) {
      Partition cut = fsg::detail::replay_merges(n, r.merge_trace, static_cast<int>(s));
      EXPECT_NEAR(r.merge_trace[s - 1].q_after, modularity_q(g, cut), 1e-10)
          << "n=" << n << " step " << s;
    }
    // the singleton baseline too
    std::vector<int> singletons(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) singletons[static_cast<size_t>(i)] = i;
    EXPECT_NEAR(r.q_singletons, modularity_q(g, singletons), 1e-12);
  }
}

TEST(FastGreedy, QOptIsTheDendrogramPeak) {
  Matrix w = random_weights(12, 13);
  ModularityResult r = fast_greedy(graph_from(w));
  double peak = r.q_singletons;
  for (const fsg::MergeStep& step : r.merge_trace) peak = std::max(peak, step.q_after);
  EXPECT_EQ(r.q_opt, peak);
}

TEST(FastGreedy, EqualGainsPickLexicographicallySmallestPair) {
  // two identical disjoint edges: merging (0,1) and merging (2,3) tie
  Matrix w(4, 4, 0.0);
  w(0, 1) = w(1, 0) = 0.5;
  w(2, 3) = w(3, 2) = 0.5;
  ModularityResult r = fast_greedy(graph_from(w));
  ASSERT_FALSE(r.merge_trace.empty());
  EXPECT_EQ(r.merge_trace[0].a, 0);
  EXPECT_EQ(r.merge_trace[0].b, 1);
}

TEST(FastGreedy, EdgelessGraphIsUndefined) {
  EXPECT_THROW(fast_greedy(graph_from(Matrix(3, 3, 0.0))), std::domain_error);
}

ModularityResult fake_result(double q_opt) {
  ModularityResult r;
  r.q_opt = q_opt;
  r.partition.labels = {1, 1};
  r.partition.k = 1;
  return r;
}

TEST(DetectModularity, HighQIsForged) {
  fsg::DetectionResult d = detect_modularity(fake_result(0.0685), 0.025);
  EXPECT_EQ(d.decision, Decision::Forged);
  EXPECT_EQ(d.statistic, 0.0685);
  EXPECT_EQ(d.method, "modularity");
}

TEST(DetectModularity, LowQIsUnaltered) {
  EXPECT_EQ(detect_modularity(fake_result(0.0030), 0.025).decision, Decision::Unaltered);
}

TEST(DetectModularity, BoundaryCountsAsForged) {
  EXPECT_EQ(detect_modularity(fake_result(0.025), 0.025).decision, Decision::Forged);
}

TEST(LocalizeModularity, TwoCommunityCut) {
  SimilarityGraph g = graph_from(clique_blocks({4, 4}, 0.9, 0.1));
  Partition p = localize_modularity(g, 2);
  EXPECT_EQ(p.k, 2);
  std::vector<int> truth{0, 0, 0, 0, 1, 1, 1, 1};
  EXPECT_TRUE(oracle::same_grouping(p.labels, truth));
  // the reported score is the modularity of exactly this cut
  EXPECT_NEAR(p.score, modularity_q(g, p), 1e-12);
}

TEST(LocalizeModularity, KEqualsNGivesSingletons) {
  SimilarityGraph g = graph_from(clique_blocks({3, 2}, 0.8, 0.1));
  Partition p = localize_modularity(g, 5);
  EXPECT_EQ(p.k, 5);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(p.labels[static_cast<size_t>(i)], i + 1);
}

TEST(LocalizeModularity, RejectsBadK) {
  SimilarityGraph g = graph_from(clique_blocks({3, 3}, 1.0, 0.0));
  EXPECT_THROW(localize_modularity(g, 1), std::invalid_argument);
  EXPECT_THROW(localize_modularity(g, 7), std::invalid_argument);
}

TEST(MergeTraceTsv, Format) {
  Matrix w(3, 3, 0.0);
  w(0, 1) = w(1, 0) = 1.0;
  w(1, 2) = w(2, 1) = 1.0;
  ModularityResult r = fast_greedy(graph_from(w));
  std::ostringstream out;
  save_merge_trace_tsv(r, out);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("step\ta\tb\tQ\n", 0), 0u) << text;
  // one line per merge plus the header
  int lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  EXPECT_EQ(lines, 3);
}

}  // namespace

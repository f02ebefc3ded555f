#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "bicr/design.hpp"
#include "bicr/errors.hpp"
#include "bicr/gen.hpp"
#include "bicr/io.hpp"
#include "bicr/objective.hpp"
#include "test_support.hpp"

using namespace bicr;

TEST(Clustering, EnforcesInvariants) {
  EXPECT_THROW(Clustering({0, 0, 2}, 3), ArgumentError);      // cluster 1 empty
  EXPECT_THROW(Clustering({0, 3}, 2), ArgumentError);         // label out of range
  EXPECT_THROW(Clustering({0, 0, 0, 0, 0, 1}, 2, 0.5), ArgumentError);
  EXPECT_NO_THROW(Clustering({0, 0, 1}, 2, 0.0));             // sizes differ by one
  EXPECT_NO_THROW(Clustering({0, 0, 0, 0, 1, 1, 1}, 2, 0.34));
  const Clustering c({1, 0, 1, 0}, 2);
  EXPECT_TRUE(c.equal_sized());
  EXPECT_EQ(c.members()[1], (std::vector<std::size_t>{0, 2}));
}

TEST(ObjectiveH, HandEvaluatedExamples) {
  const BipartiteGraph g(2, 1, {{0, 0, 1.0}, {1, 0, 1.0}});
  const FoldedGraph f = fold_graph(g);
  EXPECT_DOUBLE_EQ(objective_h(f, Clustering({0, 1}, 2)), 1.0);
  EXPECT_DOUBLE_EQ(objective_trvar(g, Clustering({0, 1}, 2)), 0.5);
  EXPECT_DOUBLE_EQ(objective_h(f, Clustering({0, 0}, 1)), 0.0);
  EXPECT_THROW(objective_h(f, Clustering({0, 1, 0}, 2)), ArgumentError);
}

TEST(ObjectiveH, ZeroCutClusteringScoresZero) {
  const auto lg = generate_sbm({40, 40, 4, 0.6, 0.0, 2});
  const Clustering truth(lg.exp_labels, 4);
  EXPECT_EQ(objective_h(fold_graph(lg.graph), truth), 0.0);
  EXPECT_EQ(objective_trvar(lg.graph, truth), 0.0);
}

TEST(ObjectiveH, NonNegativeAndZeroOnlyWithoutCrossMass) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BipartiteGraph g = test::random_graph(8, 6, 0.4, seed);
    const Clustering c = test::random_equal_clustering(8, 2, seed);
    const FoldedGraph f = fold_graph(g);
    double cross = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 8; ++j) {
        if (c.label(i) != c.label(j)) cross += f.value(i, j);
      }
    }
    const double h = objective_h(f, c);
    EXPECT_GE(h, 0.0);
    EXPECT_NEAR(h, cross, 1e-12);
    EXPECT_EQ(h == 0.0, cross == 0.0);
  }
}

// Circulant graph: every S_i and T_s equals the degree, so both objectives agree.
TEST(ObjectiveTrvar, MatchesHOnBiregularGraph) {
  const std::size_t n = 12;
  const std::size_t d = 3;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < d; ++t) edges.push_back({i, (i + t) % n, 1.0});
  }
  const BipartiteGraph g(n, n, edges);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Clustering c = test::random_equal_clustering(n, 3, seed);
    EXPECT_NEAR(objective_trvar(g, c), objective_h(fold_graph(g), c), 1e-12);
  }
}

TEST(DirectCut, BasicCases) {
  const BipartiteGraph g(2, 1, {{0, 0, 2.5}, {1, 0, 1.0}});
  const std::vector<std::size_t> one{0, 0, 0};
  const std::vector<std::size_t> cut{1, 0, 0};
  EXPECT_EQ(direct_cut_cost(g, one), 0.0);
  EXPECT_EQ(direct_cut_cost(g, cut), 2.5);
  EXPECT_THROW(direct_cut_cost(g, std::vector<std::size_t>{0, 0}), ArgumentError);
}

TEST(DirectCut, CompletionPicksHeaviestCluster) {
  const BipartiteGraph g(3, 2, {{0, 0, 1.0}, {1, 0, 2.0}, {2, 0, 0.5}});
  const auto joint = complete_joint_labels(g, Clustering({0, 1, 0}, 2));
  EXPECT_EQ(joint, (std::vector<std::size_t>{0, 1, 0, 1, 0}));
}

TEST(Counterexample, FirstFixtureSeparatesHButTiesDirectCut) {
  const BipartiteGraph g = read_graph(test::fixture("c1_graph.tsv"));
  const auto joint1 = parse_clustering_csv(read_text_file(test::fixture("c1_clustering1.csv")));
  const auto joint2 = parse_clustering_csv(read_text_file(test::fixture("c1_clustering2.csv")));
  EXPECT_EQ(direct_cut_cost(g, joint1), 4.0);
  EXPECT_EQ(direct_cut_cost(g, joint2), 4.0);
  const FoldedGraph f = fold_graph(g);
  const auto c1 = read_clustering(test::fixture("c1_clustering1.csv"), g.n_experimental());
  const auto c2 = read_clustering(test::fixture("c1_clustering2.csv"), g.n_experimental());
  EXPECT_LT(objective_h(f, c1), objective_h(f, c2));
}

TEST(Counterexample, SecondFixtureSeparatesDoseVarianceFromH) {
  const BipartiteGraph g = read_graph(test::fixture("c2_graph.tsv"));
  const FoldedGraph f = fold_graph(g);
  const auto c1 = read_clustering(test::fixture("c2_clustering1.csv"), g.n_experimental());
  const auto c2 = read_clustering(test::fixture("c2_clustering2.csv"), g.n_experimental());
  EXPECT_LT(objective_h(f, c1), objective_h(f, c2));
  EXPECT_LT(objective_trvar(g, c2), objective_trvar(g, c1));
}

TEST(CovTrace, PerfectClusteringGivesN) {
  const auto lg = generate_sbm({20, 20, 2, 0.7, 0.0, 3});
  EXPECT_NEAR(cov_trace_exact(fold_graph(lg.graph), Clustering(lg.exp_labels, 2), 1), 20.0, 1e-12);
}

TEST(CovTrace, RejectsTreatedCountOutOfRange) {
  const BipartiteGraph g = test::random_graph(4, 3, 0.5, 1);
  const Clustering c({0, 0, 1, 1}, 2);
  EXPECT_THROW(cov_trace_exact(fold_graph(g), c, 0), ArgumentError);
  EXPECT_THROW(cov_trace_exact(fold_graph(g), c, 2), ArgumentError);
}

// Oracle: enumerate every treated subset and average sum_i (z_i - Ez_i)(e_i - Ee_i).
TEST(CovTrace, ClosedFormMatchesEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 12;
    const std::size_t k = seed % 2 == 0 ? 4 : 3;
    const std::size_t k_t = 1 + seed % (k - 1);
    const BipartiteGraph g = test::random_graph(n, 8, 0.3, seed);
    const Clustering c = test::random_equal_clustering(n, k, seed);
    const FoldedGraph f = fold_graph(g);

    std::vector<std::vector<int>> zs;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != k_t) continue;
      std::vector<int> z(n);
      for (std::size_t i = 0; i < n; ++i) z[i] = (mask >> c.label(i)) & 1u ? 1 : -1;
      zs.push_back(z);
    }
    std::vector<double> ez(n, 0.0), ee(n, 0.0);
    std::vector<std::vector<double>> es;
    for (const auto& z : zs) {
      es.push_back(f.apply(std::span<const int>(z)));
      for (std::size_t i = 0; i < n; ++i) {
        ez[i] += z[i] / static_cast<double>(zs.size());
        ee[i] += es.back()[i] / static_cast<double>(zs.size());
      }
    }
    double trace = 0.0;
    for (std::size_t a = 0; a < zs.size(); ++a) {
      for (std::size_t i = 0; i < n; ++i) trace += (zs[a][i] - ez[i]) * (es[a][i] - ee[i]);
    }
    trace /= static_cast<double>(zs.size());
    EXPECT_NEAR(cov_trace_exact(f, c, k_t), trace, 1e-10) << "seed " << seed;
  }
}

TEST(CovTrace, MonteCarloAgreesWithClosedForm) {
  const BipartiteGraph g = test::random_graph(12, 10, 0.3, 5);
  const Clustering c = test::random_equal_clustering(12, 4, 5);
  const FoldedGraph f = fold_graph(g);
  const double exact = cov_trace_exact(f, c, 1);
  const MonteCarloEstimate mc = cov_trace_monte_carlo(f, c, 1, 100000, 17);
  EXPECT_LT(std::abs(mc.value - exact), 3.0 * mc.std_error);
}

// With half the clusters treated, rows of C summing to one give
// Tr Cov(Z, e) = N - (K / (K - 1)) H(C).
TEST(CovTrace, HalfTreatedTraceIsAffineInH) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BipartiteGraph g = test::random_graph(12, 6, 0.3, 40 + seed);
    const FoldedGraph f = fold_graph(g);
    const Clustering c = test::random_equal_clustering(12, 4, seed);
    EXPECT_NEAR(cov_trace_exact(f, c, 2), 12.0 - (4.0 / 3.0) * objective_h(f, c), 1e-12);
  }
}

TEST(CovTrace, ArgminHEqualsArgmaxCovarianceOnSmallGraphs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const BipartiteGraph g = test::random_graph(8, 6, 0.35, 100 + seed);
    const FoldedGraph f = fold_graph(g);
    std::vector<double> hs, covs;
    for (unsigned mask = 0; mask < 256; ++mask) {
      if (__builtin_popcount(mask) != 4 || (mask & 1u) == 0) continue;
      std::vector<std::size_t> labels(8);
      for (std::size_t i = 0; i < 8; ++i) labels[i] = (mask >> i) & 1u;
      const Clustering c(labels, 2);
      hs.push_back(objective_h(f, c));
      covs.push_back(cov_trace_exact(f, c, 1));
    }
    ASSERT_EQ(hs.size(), 35u);
    const double hmin = *std::min_element(hs.begin(), hs.end());
    const double cmax = *std::max_element(covs.begin(), covs.end());
    for (std::size_t a = 0; a < hs.size(); ++a) {
      EXPECT_EQ(std::abs(hs[a] - hmin) < 1e-9, std::abs(covs[a] - cmax) < 1e-9);
    }
  }
}

#include <gtest/gtest.h>

#include <cmath>

#include "bicr/design.hpp"
#include "bicr/errors.hpp"
#include "test_support.hpp"

using namespace bicr;

TEST(BalancedDesign, TwoClustersOneTreated) {
  const Clustering c({0, 0, 0, 1, 1, 1}, 2);
  const DesignSpec spec = balanced_cluster_design("two", c, 1, 5);
  int first_treated = 0;
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    const Assignment a = sample_assignment(spec, d, 6);
    EXPECT_EQ(treated_counts(a), (std::pair<std::size_t, std::size_t>{3, 3}));
    EXPECT_EQ(a.z[0], a.z[2]);
    EXPECT_NE(a.z[0], a.z[3]);
    first_treated += a.z[0] > 0;
  }
  EXPECT_NEAR(first_treated / static_cast<double>(draws), 0.5, 0.02);
}

TEST(BalancedDesign, SingleTreatedClusterForcesOthersControl) {
  const Clustering c({0, 1, 2, 3, 0, 1, 2, 3}, 4);
  const DesignSpec spec = balanced_cluster_design("four", c, 1, 9);
  for (int d = 0; d < 500; ++d) {
    const Assignment a = sample_assignment(spec, d, 8);
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 8; ++j) {
        if (a.z[i] > 0 && c.label(i) != c.label(j)) EXPECT_EQ(a.z[j], -1);
      }
    }
  }
}

TEST(BalancedDesign, MarginalTreatmentProbability) {
  const Clustering c = test::random_equal_clustering(15, 5, 1);
  const DesignSpec spec = balanced_cluster_design("m", c, 2, 13);
  const int draws = 10000;
  std::vector<int> treated(15, 0);
  for (int d = 0; d < draws; ++d) {
    const Assignment a = sample_assignment(spec, d, 15);
    for (std::size_t i = 0; i < 15; ++i) treated[i] += a.z[i] > 0;
  }
  const double p = 2.0 / 5.0;
  const double se = std::sqrt(p * (1 - p) / draws);
  for (int t : treated) EXPECT_LT(std::abs(t / static_cast<double>(draws) - p), 3.5 * se);
}

// Oracle from pair counts: P(both treated) = K_T (K_T - 1) / (K (K - 1)), and
// likewise for control, so E[z_i z_j] = ((K_T - K_C)^2 - K) / (K (K - 1)).
TEST(BalancedDesign, CrossClusterCovarianceMatchesClosedForm) {
  const std::size_t k = 5;
  const std::size_t k_t = 2;
  const Clustering c({0, 1, 2, 3, 4}, k);
  const DesignSpec spec = balanced_cluster_design("cov", c, k_t, 3);
  const double diff = static_cast<double>(k_t) - static_cast<double>(k - k_t);
  const double m = diff / k;
  const double expected = (diff * diff - k) / (k * (k - 1.0)) - m * m;
  const int draws = 100000;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int d = 0; d < draws; ++d) {
    const Assignment a = sample_assignment(spec, d, 5);
    const double v = (a.z[0] - m) * (a.z[3] - m);
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sumsq / draws - mean * mean) / draws);
  EXPECT_LT(std::abs(mean - expected), 3.0 * se);
}

TEST(BalancedDesign, RejectsDegenerateTreatedCounts) {
  const Clustering c({0, 1, 2}, 3);
  EXPECT_THROW(balanced_cluster_design("x", c, 0, 1), ArgumentError);
  EXPECT_THROW(balanced_cluster_design("x", c, 3, 1), ArgumentError);
  EXPECT_THROW(sample_assignment(balanced_cluster_design("x", c, 1, 1), 0, 4), ArgumentError);
}

TEST(Design, SameSeedAndDrawGiveSameAssignment) {
  const DesignSpec spec = balanced_cluster_design("d", test::random_equal_clustering(40, 8, 2), 4, 77);
  EXPECT_EQ(sample_assignment(spec, 12, 40).z, sample_assignment(spec, 12, 40).z);
  EXPECT_NE(sample_assignment(spec, 12, 40).z, sample_assignment(spec, 13, 40).z);
}

TEST(UnitBernoulli, CertainTreatment) {
  const Assignment a = sample_assignment(unit_bernoulli_design(1.0, 1), 0, 10);
  EXPECT_EQ(treated_counts(a), (std::pair<std::size_t, std::size_t>{10, 0}));
  EXPECT_THROW(unit_bernoulli_design(0.0, 1), ArgumentError);
  EXPECT_THROW(unit_bernoulli_design(1.5, 1), ArgumentError);
}

TEST(UnitBernoulli, FrequencyMatchesProbability) {
  const DesignSpec spec = unit_bernoulli_design(0.3, 4);
  std::size_t treated = 0;
  const std::size_t n = 1000;
  for (int d = 0; d < 20; ++d) treated += treated_counts(sample_assignment(spec, d, n)).first;
  const double se = std::sqrt(0.3 * 0.7 / (20.0 * n));
  EXPECT_LT(std::abs(treated / (20.0 * n) - 0.3), 4 * se);
}

TEST(ClusterBernoulli, MembersShareAssignment) {
  const Clustering c = test::random_equal_clustering(30, 6, 3);
  const DesignSpec spec = cluster_bernoulli_design("cb", c, 0.5, 8);
  for (int d = 0; d < 50; ++d) {
    const Assignment a = sample_assignment(spec, d, 30);
    for (std::size_t i = 0; i < 30; ++i) {
      for (std::size_t j = 0; j < 30; ++j) {
        if (c.label(i) == c.label(j)) EXPECT_EQ(a.z[i], a.z[j]);
      }
    }
  }
}

TEST(TreatedCounts, EdgeCases) {
  EXPECT_EQ(treated_counts(Assignment::constant(7, 1)), (std::pair<std::size_t, std::size_t>{7, 0}));
  EXPECT_EQ(treated_counts(Assignment{}), (std::pair<std::size_t, std::size_t>{0, 0}));
}

TEST(UnitLevelDesign, TreatsHalf) {
  const DesignSpec spec = unit_level_design(11, 2);
  EXPECT_EQ(treated_counts(sample_assignment(spec, 0, 11)).first, 5u);
}

#include <gtest/gtest.h>

#include <cstring>

#include "bicr/gen.hpp"
#include "bicr/harness.hpp"
#include "bicr/io.hpp"
#include "bicr/reference.hpp"
#include "test_support.hpp"

using namespace bicr;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

void expect_same_interval(const Interval& a, const Interval& b) {
  EXPECT_EQ(std::memcmp(&a, &b, sizeof(Interval)), 0);
}

void expect_same_intervals(const BootstrapIntervals& a, const BootstrapIntervals& b) {
  expect_same_interval(a.mean, b.mean);
  expect_same_interval(a.tau, b.tau);
  expect_same_interval(a.bias, b.bias);
  expect_same_interval(a.relative_bias, b.relative_bias);
  expect_same_interval(a.std, b.std);
  expect_same_interval(a.rmse, b.rmse);
}

void expect_same_reports(const std::vector<EvalReport>& a, const std::vector<EvalReport>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_TRUE(bitwise_equal(a[k].estimates, b[k].estimates));
    EXPECT_TRUE(bitwise_equal(a[k].tau_replicates, b[k].tau_replicates));
    expect_same_intervals(a[k].dim, b[k].dim);
    EXPECT_EQ(a[k].has_ips, b[k].has_ips);
    if (a[k].has_ips) expect_same_intervals(a[k].ips, b[k].ips);
    EXPECT_EQ(a[k].ips_skipped, b[k].ips_skipped);
    EXPECT_EQ(a[k].clamped, b[k].clamped);
  }
  EXPECT_EQ(format_results(a), format_results(b));
}

}  // namespace

TEST(Reference, FoldIsBitIdentical) {
  const auto lg = generate_sbm({300, 500, 10, 0.3, 0.01, 3});
  for (const char* code : {"nn", "nu", "un", "uu"}) {
    const NormalizationMode mode = NormalizationMode::parse(code);
    EXPECT_EQ(format_folded_tsv(fold_graph(lg.graph, mode)),
              format_folded_tsv(reference::fold_graph(lg.graph, mode)))
        << code;
    EXPECT_TRUE(fold_graph(lg.graph, mode) == reference::fold_graph(lg.graph, mode));
  }
}

TEST(Reference, PropensitiesAreBitIdentical) {
  const BipartiteGraph g = test::random_graph(60, 40, 0.05, 4);
  const DesignSpec d = balanced_cluster_design("c", test::random_equal_clustering(60, 6, 4), 3, 9);
  const PropensityTable a = estimate_propensities(d, g, 0.5, 500);
  const PropensityTable b = reference::estimate_propensities(d, g, 0.5, 500);
  EXPECT_TRUE(bitwise_equal(a.treated, b.treated));
  EXPECT_TRUE(bitwise_equal(a.control, b.control));
}

TEST(Reference, BootstrapIsBitIdentical) {
  std::vector<double> est(200);
  std::vector<double> reps(50);
  Rng rng(5);
  for (double& v : est) v = uniform01(rng);
  for (double& v : reps) v = uniform01(rng) - 0.5;
  expect_same_intervals(bootstrap_metrics(est, 0.3, {}, 500, 7),
                        reference::bootstrap_metrics(est, 0.3, {}, 500, 7));
  expect_same_intervals(bootstrap_metrics(est, 0.3, reps, 500, 7),
                        reference::bootstrap_metrics(est, 0.3, reps, 500, 7));
}

TEST(Reference, LinearExperimentWithIpsIsBitIdentical) {
  const BipartiteGraph g = test::random_graph(40, 30, 0.05, 6);
  const std::vector<DesignSpec> designs{
      balanced_cluster_design("c", test::random_equal_clustering(40, 4, 6), 2, 3),
      unit_level_design(40, 3), cluster_bernoulli_design("cb", test::random_equal_clustering(40, 8, 1), 0.5, 3)};
  ExperimentConfig cfg;
  cfg.draws = 120;
  cfg.seed = 11;
  cfg.bootstrap_resamples = 200;
  cfg.ips_delta = 0.4;
  cfg.propensity_draws = 300;
  const OutcomeModel model = LinearOutcome{preset_coefficients(40, 2)};
  expect_same_reports(run_experiment(g, designs, model, cfg),
                      reference::run_experiment(g, designs, model, cfg));
}

TEST(Reference, DeltaExperimentIsBitIdentical) {
  const BipartiteGraph g = test::random_graph(30, 30, 0.1, 8);
  const std::vector<DesignSpec> designs{unit_bernoulli_design(0.5, 2)};
  ExperimentConfig cfg;
  cfg.draws = 100;
  cfg.seed = 4;
  cfg.bootstrap_resamples = 100;
  const OutcomeModel model = DeltaOutcome{{0.3}};
  expect_same_reports(run_experiment(g, designs, model, cfg),
                      reference::run_experiment(g, designs, model, cfg));
}

TEST(Reference, MarketplaceExperimentIsBitIdentical) {
  MarketplaceSpec spec;
  spec.n_customers = 40;
  spec.n_listings = 80;
  spec.n_types = 4;
  spec.phi_same = 0.05;
  spec.phi_diff = 0.002;
  spec.alpha_lift = 2.0;
  spec.seed = 3;
  const BipartiteGraph g = build_history_graph(spec);
  const std::vector<DesignSpec> designs{unit_level_design(40, 1)};
  ExperimentConfig cfg;
  cfg.draws = 40;
  cfg.seed = 2;
  cfg.bootstrap_resamples = 100;
  cfg.tau_replications = 30;
  const OutcomeModel model = MarketplaceOutcome{spec};
  expect_same_reports(run_experiment(g, designs, model, cfg),
                      reference::run_experiment(g, designs, model, cfg));
}

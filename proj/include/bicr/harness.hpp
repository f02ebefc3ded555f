#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bicr/design.hpp"
#include "bicr/graph.hpp"
#include "bicr/objective.hpp"
#include "bicr/outcome.hpp"

namespace bicr {

// E[tau_hat_DIM] - tau for the linear model under a balanced cluster design:
// -(2/N) (K/(K-1)) sum_i sum_{j notin C(i)} gamma_i c_ij. Exact when all
// clusters have equal size; independent of the treated count. Throws
// ArgumentError unless the fold is fully normalized.
double exact_bias_linear(const FoldedGraph& folded, const Clustering& c,
                         std::span<const double> gamma);

inline constexpr std::uint64_t kMaxEnumeration = 100'000;

// C(k, k_t), saturating at UINT64_MAX.
std::uint64_t count_assignments(std::size_t k, std::size_t k_t);

// Exact bias by averaging the DIM estimate of E[Y | z, e] over every k_t-subset
// of clusters. Throws ResourceError above kMaxEnumeration subsets.
double brute_force_bias(const BipartiteGraph& g, const Clustering& c, std::size_t k_t,
                        const OutcomeModel& model,
                        NormalizationMode mode = NormalizationMode::full());

struct BoundCheck {
  double measured = 0.0;  // |brute-force bias|
  double bound = 0.0;
  bool holds = false;     // measured <= bound + 1e-10
};

// Lipschitz family: bound (2/N)(K/(K-1)) L H(C).
// Delta family: bound (2B/(N delta))(K/(K-1)) H(C) with B = 2.
// Other models are argument errors.
BoundCheck lemma_bound_check(const BipartiteGraph& g, const Clustering& c, std::size_t k_t,
                             const OutcomeModel& model);

// Probability that an experimental unit has no two-hop neighbor outside its
// own group in the bipartite SBM: (1 - p q)^(2 m n / k^2).
double sbm_two_hop_isolation_prob(double p, double q, std::size_t m, std::size_t n, std::size_t k);

struct Interval {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct ExperimentConfig {
  std::size_t draws = 100;
  std::uint64_t seed = 0;  // drives outcome noise, the marketplace effect and the bootstrap
  std::size_t bootstrap_resamples = 1000;
  NormalizationMode mode = NormalizationMode::full();
  double ips_delta = 0.0;  // 0 disables the IPS estimator
  std::size_t propensity_draws = 2000;
  std::size_t tau_replications = 500;

  void validate() const;
};

struct PointMetrics {
  double mean = 0.0;
  double tau = 0.0;
  double bias = 0.0;
  double relative_bias = 0.0;
  double std = 0.0;   // population standard deviation of the estimates
  double rmse = 0.0;  // sqrt(mean((estimate - tau)^2))
};

// tau is the mean of tau_replicates when that span is non-empty.
PointMetrics point_metrics(std::span<const double> estimates, double tau,
                           std::span<const double> tau_replicates = {});

// Linear-interpolation quantile of sorted data, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

struct BootstrapIntervals {
  Interval mean;
  Interval tau;
  Interval bias;
  Interval relative_bias;
  Interval std;
  Interval rmse;
};

// 95% percentile bootstrap over the estimates (and tau replicates, if any),
// resample b drawing from make_rng(seed, b, Stream::bootstrap).
BootstrapIntervals bootstrap_metrics(std::span<const double> estimates, double tau,
                                     std::span<const double> tau_replicates,
                                     std::size_t resamples, std::uint64_t seed);

struct EvalReport {
  std::string design;
  std::string model;
  double objective_h = 0.0;
  double objective_trvar = 0.0;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;

  BootstrapIntervals dim;
  double std_error = 0.0;  // standard error of the mean estimate
  std::vector<double> estimates;
  std::vector<double> tau_replicates;

  bool has_ips = false;
  BootstrapIntervals ips;
  std::size_t ips_skipped = 0;
  std::size_t clamped = 0;
};

// For every design: draw assignment d from sample_assignment(design, d), compute
// exposures, simulate outcomes with make_rng(cfg.seed, d, Stream::outcome),
// and summarize the DIM (and optionally IPS) estimates against the true effect.
// Draws run in parallel; all reductions are in draw order.
std::vector<EvalReport> run_experiment(const BipartiteGraph& g, std::span<const DesignSpec> designs,
                                       const OutcomeModel& model, const ExperimentConfig& cfg);

inline constexpr int kResultsSchema = 1;

std::string results_header();
std::string format_results(std::span<const EvalReport> reports);
// Appends rows, writing the header first when the file is new or empty.
void append_results(const std::string& path, std::span<const EvalReport> reports);

// Fixed-width table of a results CSV, one block per (design, draws, seed).
std::string render_report(std::string_view results_csv);

}  // namespace bicr

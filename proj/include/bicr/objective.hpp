#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bicr/graph.hpp"

namespace bicr {

// Partition of the experimental units into k nonempty clusters whose sizes
// are balanced: either they differ by at most one unit, or the ratio of the
// largest to the smallest is within 1 + tolerance.
class Clustering {
 public:
  Clustering() = default;
  // Throws ArgumentError if a label is >= k, a cluster is empty, or the
  // sizes violate the tolerance.
  Clustering(std::vector<std::size_t> labels, std::size_t k, double tolerance = 0.1);
  // Infers k as max label + 1.
  static Clustering from_labels(std::vector<std::size_t> labels,
                                double tolerance = std::numeric_limits<double>::infinity());
  // Every unit its own cluster: the unit-level design.
  static Clustering singletons(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  std::size_t k() const { return k_; }
  double tolerance() const { return tolerance_; }
  std::size_t label(std::size_t i) const { return labels_[i]; }
  std::span<const std::size_t> labels() const { return labels_; }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  // Members of each cluster in increasing unit order.
  std::vector<std::vector<std::size_t>> members() const;
  bool equal_sized() const;

  friend bool operator==(const Clustering& a, const Clustering& b) {
    return a.k_ == b.k_ && a.labels_ == b.labels_;
  }

 private:
  std::vector<std::size_t> labels_;
  std::size_t k_ = 0;
  double tolerance_ = 0.1;
  std::vector<std::size_t> sizes_;
};

// True if sizes differ by at most one, or max <= (1 + tolerance) * min.
bool sizes_within_tolerance(double smallest, double largest, double tolerance);

// Off-diagonal cross-cluster mass of the folded graph, sum_i sum_{j notin C(i)} c_ij.
// With the fully normalized fold this is the bias objective H(C); other
// folds give its generalization with gamma dropped.
double objective_h(const FoldedGraph& folded, const Clustering& c);

// Cross-cluster mass with both endpoints normalized by the interference
// unit's weight: sum_i sum_{j notin C(i)} sum_s (w_is / T_s)(w_js / T_s).
// Minimizing it maximizes the trace of the dose variance.
double objective_trvar(const BipartiteGraph& g, const Clustering& c);

// Total weight of bipartite edges whose endpoints carry different labels.
// joint_labels holds N experimental labels followed by M interference labels.
double direct_cut_cost(const BipartiteGraph& g, std::span<const std::size_t> joint_labels);

// Extends an experimental-unit clustering to interference units by placing
// each interference unit in the cluster holding most of its edge weight
// (lowest cluster id on ties; cluster 0 for isolated units).
std::vector<std::size_t> complete_joint_labels(const BipartiteGraph& g, const Clustering& c);

// Trace of Cov(Z, e) under the balanced design on c with k_t treated
// clusters, from the closed form. Isolated units count as e_i = z_i.
double cov_trace_exact(const FoldedGraph& folded, const Clustering& c, std::size_t k_t);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Same quantity averaged over sampled designs, centering at the exact design
// means E[z_i] and E[e_i].
MonteCarloEstimate cov_trace_monte_carlo(const FoldedGraph& folded, const Clustering& c,
                                         std::size_t k_t, std::size_t draws, std::uint64_t seed);

}  // namespace bicr

#include "bicr/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bicr/design.hpp"
#include "bicr/errors.hpp"
#include "parallel_errors.hpp"

namespace bicr {

bool sizes_within_tolerance(double smallest, double largest, double tolerance) {
  return largest - smallest <= 1.0 || largest <= (1.0 + tolerance) * smallest;
}

Clustering::Clustering(std::vector<std::size_t> labels, std::size_t k, double tolerance)
    : labels_(std::move(labels)), k_(k), tolerance_(tolerance), sizes_(k, 0) {
  if (k_ == 0) throw ArgumentError("a clustering needs at least one cluster");
  if (!(tolerance_ >= 0.0)) throw ArgumentError("tolerance must be nonnegative");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= k_) {
      throw ArgumentError("unit " + std::to_string(i) + " has label " + std::to_string(labels_[i]) +
                          " outside [0, " + std::to_string(k_) + ")");
    }
    ++sizes_[labels_[i]];
  }
  const auto [lo, hi] = std::minmax_element(sizes_.begin(), sizes_.end());
  if (*lo == 0) throw ArgumentError("cluster " + std::to_string(lo - sizes_.begin()) + " is empty");
  if (!sizes_within_tolerance(static_cast<double>(*lo), static_cast<double>(*hi), tolerance_)) {
    throw ArgumentError("cluster sizes " + std::to_string(*lo) + ".." + std::to_string(*hi) +
                        " exceed the imbalance tolerance " + std::to_string(tolerance_));
  }
}

Clustering Clustering::from_labels(std::vector<std::size_t> labels, double tolerance) {
  std::size_t k = 0;
  for (std::size_t l : labels) k = std::max(k, l + 1);
  return Clustering(std::move(labels), k, tolerance);
}

Clustering Clustering::singletons(std::size_t n) {
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i;
  return Clustering(std::move(labels), n, 0.0);
}

std::vector<std::vector<std::size_t>> Clustering::members() const {
  std::vector<std::vector<std::size_t>> out(k_);
  for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]].push_back(i);
  return out;
}

bool Clustering::equal_sized() const {
  return std::all_of(sizes_.begin(), sizes_.end(), [&](std::size_t s) { return s == sizes_[0]; });
}

double objective_h(const FoldedGraph& folded, const Clustering& c) {
  if (folded.n() != c.size()) {
    throw ArgumentError("folded graph has " + std::to_string(folded.n()) +
                        " units, clustering has " + std::to_string(c.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < folded.n(); ++i) {
    for (const Neighbor& nb : folded.row(i)) {
      if (nb.index != i && c.label(nb.index) != c.label(i)) total += nb.weight;
    }
  }
  return total;
}

double objective_trvar(const BipartiteGraph& g, const Clustering& c) {
  if (g.n_experimental() != c.size()) {
    throw ArgumentError("graph has " + std::to_string(g.n_experimental()) +
                        " experimental units, clustering has " + std::to_string(c.size()));
  }
  // Per interference unit: sum over cross pairs of a_i a_j equals
  // (sum a)^2 minus the within-cluster squares.
  std::vector<double> per_cluster(c.k(), 0.0);
  std::vector<std::size_t> touched;
  double total = 0.0;
  for (std::size_t s = 0; s < g.n_interference(); ++s) {
    const double t_s = g.col_sum(s);
    if (t_s == 0.0) continue;
    double all = 0.0;
    touched.clear();
    for (const Neighbor& nb : g.int_neighbors(s)) {
      const double a = nb.weight / t_s;
      const std::size_t l = c.label(nb.index);
      if (per_cluster[l] == 0.0) touched.push_back(l);
      per_cluster[l] += a;
      all += a;
    }
    double within = 0.0;
    for (std::size_t l : touched) {
      within += per_cluster[l] * per_cluster[l];
      per_cluster[l] = 0.0;
    }
    total += all * all - within;
  }
  return std::max(total, 0.0);
}

double direct_cut_cost(const BipartiteGraph& g, std::span<const std::size_t> joint_labels) {
  const std::size_t n = g.n_experimental();
  if (joint_labels.size() != n + g.n_interference()) {
    throw ArgumentError("direct cut needs " + std::to_string(n + g.n_interference()) +
                        " labels, got " + std::to_string(joint_labels.size()));
  }
  double cost = 0.0;
  for (const Edge& e : g.edges()) {
    if (joint_labels[e.exp] != joint_labels[n + e.intf]) cost += e.weight;
  }
  return cost;
}

std::vector<std::size_t> complete_joint_labels(const BipartiteGraph& g, const Clustering& c) {
  if (g.n_experimental() != c.size()) throw ArgumentError("clustering does not match graph");
  std::vector<std::size_t> joint(c.labels().begin(), c.labels().end());
  std::vector<double> weight(c.k(), 0.0);
  for (std::size_t s = 0; s < g.n_interference(); ++s) {
    std::fill(weight.begin(), weight.end(), 0.0);
    for (const Neighbor& nb : g.int_neighbors(s)) weight[c.label(nb.index)] += nb.weight;
    joint.push_back(static_cast<std::size_t>(std::max_element(weight.begin(), weight.end()) -
                                             weight.begin()));
  }
  return joint;
}

namespace {

void check_treated_count(const Clustering& c, std::size_t k_t) {
  if (k_t == 0 || k_t >= c.k()) {
    throw ArgumentError("treated cluster count must satisfy 0 < k_t < k (k_t = " +
                        std::to_string(k_t) + ", k = " + std::to_string(c.k()) + ")");
  }
}

}  // namespace

double cov_trace_exact(const FoldedGraph& folded, const Clustering& c, std::size_t k_t) {
  if (folded.n() != c.size()) throw ArgumentError("folded graph does not match clustering");
  check_treated_count(c, k_t);
  const double k = static_cast<double>(c.k());
  const double diff = static_cast<double>(k_t) - (k - static_cast<double>(k_t));
  const double mean = diff / k;
  const double same = 1.0 - mean * mean;
  // E[z_i z_j] for units in different clusters is ((K_T - K_C)^2 - K) / (K (K - 1)).
  const double cross = (diff * diff - k) / (k * (k - 1.0)) - mean * mean;

  double total = 0.0;
  for (std::size_t i = 0; i < folded.n(); ++i) {
    if (folded.row_empty(i)) {
      total += same;
      continue;
    }
    for (const Neighbor& nb : folded.row(i)) {
      total += nb.weight * (c.label(nb.index) == c.label(i) ? same : cross);
    }
  }
  return total;
}

MonteCarloEstimate cov_trace_monte_carlo(const FoldedGraph& folded, const Clustering& c,
                                         std::size_t k_t, std::size_t draws, std::uint64_t seed) {
  if (folded.n() != c.size()) throw ArgumentError("folded graph does not match clustering");
  check_treated_count(c, k_t);
  if (draws < 2) throw ArgumentError("Monte-Carlo covariance needs at least two draws");
  const std::size_t n = folded.n();
  const DesignSpec design = balanced_cluster_design("cov", c, k_t, seed);

  const double k = static_cast<double>(c.k());
  const double z_mean = (2.0 * static_cast<double>(k_t) - k) / k;
  const std::vector<double> z_means(n, z_mean);
  const std::vector<double> e_means = folded.apply(std::span<const double>(z_means));

  std::vector<double> per_draw(draws);
  detail::ParallelErrors errors;
#pragma omp parallel for schedule(static)
  for (std::size_t d = 0; d < draws; ++d) {
    errors.run(d, [&] {
      const Assignment a = sample_assignment(design, d, n);
      const std::vector<double> e = folded.apply(std::span<const int>(a.z));
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += (a.z[i] - z_mean) * (e[i] - e_means[i]);
      per_draw[d] = acc;
    });
  }
  errors.rethrow();

  double sum = 0.0;
  for (double v : per_draw) sum += v;
  const double mean = sum / static_cast<double>(draws);
  double ss = 0.0;
  for (double v : per_draw) ss += (v - mean) * (v - mean);
  const double var = ss / static_cast<double>(draws - 1);
  return {mean, std::sqrt(var / static_cast<double>(draws))};
}

}  // namespace bicr

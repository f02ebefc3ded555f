#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "bicr/graph.hpp"
#include "bicr/objective.hpp"

namespace bicr {

// Undirected weighted graph in CSR form. Each undirected edge is stored in
// both endpoint rows; self loops are dropped. Node weights count toward the
// balance constraint (interference units in the direct bipartite cut carry 0).
class WeightedGraph {
 public:
  WeightedGraph() = default;
  // Entries (u, v, w) with u != v; duplicate pairs are summed. Throws
  // ArgumentError on out-of-range ids or negative/non-finite weights.
  WeightedGraph(std::size_t n, std::span<const Edge> undirected_edges,
                std::vector<double> node_weights = {});

  std::size_t n() const { return node_weight_.size(); }
  std::span<const Neighbor> neighbors(std::size_t u) const;
  double node_weight(std::size_t u) const { return node_weight_[u]; }
  double total_edge_weight() const { return total_; }

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adj_;
  std::vector<double> node_weight_;
  double total_ = 0.0;
};

// Symmetrized folded graph: w_ij = c_ij + c_ji, diagonal excluded.
WeightedGraph h_partition_graph(const FoldedGraph& folded);
// Pair weights 2 * sum_s (w_is / T_s)(w_js / T_s) driving objective_trvar.
WeightedGraph trvar_partition_graph(const BipartiteGraph& g);
// Joint graph over N experimental then M interference units, with the
// interference units weightless for balance.
WeightedGraph direct_partition_graph(const BipartiteGraph& g);

enum class InitMethod { greedy_line, random };
InitMethod parse_init_method(std::string_view name);

struct PartitionConfig {
  std::size_t k = 2;
  double tolerance = 0.1;
  std::size_t max_passes = 20;
  InitMethod init = InitMethod::greedy_line;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PartitionResult {
  std::vector<std::size_t> labels;  // one per graph node
  std::size_t k = 0;
  double cut = 0.0;
  std::vector<double> cut_history;  // initial cut, then one entry per pass
  std::size_t passes = 0;
};

// Cut weight of an undirected labeling (each edge counted once).
double cut_weight(const WeightedGraph& g, std::span<const std::size_t> labels);

// Line embedding: a weighted traversal from a seeded start ordering nodes,
// then k contiguous segments of near-equal node weight.
std::vector<std::size_t> init_greedy_line(const WeightedGraph& g, std::size_t k,
                                          std::uint64_t seed);

// Swap-based local search from the configured initialization.
// Throws ArgumentError when fewer than k units carry node weight, or when
// the tolerance is invalid.
PartitionResult partition_graph(const WeightedGraph& g, const PartitionConfig& cfg);

// Same solve, returned as a Clustering over all nodes.
Clustering balanced_partition(const WeightedGraph& g, const PartitionConfig& cfg);

// Runs `starts` seeds (cfg.seed + index-derived streams) in parallel and keeps
// the lowest cut, lowest start index on ties.
PartitionResult best_of(const WeightedGraph& g, const PartitionConfig& cfg, std::size_t starts);

// Balanced partition of the joint bipartite graph by direct edge cut,
// restricted to the experimental units.
Clustering direct_clustering(const BipartiteGraph& g, const PartitionConfig& cfg);

}  // namespace bicr

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>

#include "bicr/graph.hpp"
#include "bicr/objective.hpp"

namespace bicr {

// k_t of the k clusters, chosen uniformly, are treated; members inherit.
struct BalancedCluster {
  Clustering clustering;
  std::size_t k_t = 0;
};

// Each unit treated independently with probability p.
struct UnitBernoulli {
  double p = 0.5;
};

// Each cluster treated independently with probability p.
struct ClusterBernoulli {
  Clustering clustering;
  double p = 0.5;
};

struct DesignSpec {
  std::string name;
  std::variant<BalancedCluster, UnitBernoulli, ClusterBernoulli> kind;
  std::uint64_t seed = 0;

  // Throws ArgumentError for k_t outside (0, k) or p outside (0, 1].
  void validate() const;
  std::size_t n_units() const;  // 0 for UnitBernoulli (size-free)
  // Clustering the design randomizes over (singletons for UnitBernoulli).
  Clustering clustering(std::size_t n) const;
};

DesignSpec balanced_cluster_design(std::string name, Clustering c, std::size_t k_t,
                                   std::uint64_t seed);
// Complete randomization: singleton clusters with floor(n / 2) treated.
DesignSpec unit_level_design(std::size_t n, std::uint64_t seed);
DesignSpec unit_bernoulli_design(double p, std::uint64_t seed);
DesignSpec cluster_bernoulli_design(std::string name, Clustering c, double p, std::uint64_t seed);

// Deterministic function of (spec.seed, draw_index). n is required for
// UnitBernoulli and must match the clustering size otherwise.
Assignment sample_assignment(const DesignSpec& spec, std::uint64_t draw_index, std::size_t n);

// (treated, control) counts.
std::pair<std::size_t, std::size_t> treated_counts(const Assignment& a);

}  // namespace bicr

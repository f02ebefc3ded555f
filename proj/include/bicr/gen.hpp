#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bicr/graph.hpp"
#include "bicr/rng.hpp"

namespace bicr {

// Bipartite stochastic block model: both sides split into equally sized
// contiguous groups; each (i, s) pair gets a weight-1 edge independently with
// probability p_in (same group) or p_out (different groups).
struct SbmSpec {
  std::size_t n_experimental = 0;
  std::size_t n_interference = 0;
  std::size_t n_groups = 1;
  double p_in = 0.5;
  double p_out = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Ground-truth labels are returned alongside the graph so the "true
// clusters" design can be built directly.
struct LabeledGraph {
  BipartiteGraph graph;
  std::vector<std::size_t> exp_labels;
  std::vector<std::size_t> int_labels;
};

LabeledGraph generate_sbm(const SbmSpec& spec);

// Preferential-attachment bipartite graph with latent class affinity.
struct PowerLawSpec {
  std::size_t n_experimental = 100;
  std::size_t n_classes = 10;
  double lambda = 0.5;  // probability that a stub creates a new interference unit
  double p = 100.0;     // same-class affinity
  double q = 2.0;       // cross-class affinity
  double zipf_exponent = 3.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Experimental unit i belongs to class i mod K. Each unit draws degree
// 2X with X ~ Zipf(exponent); every stub either creates a fresh interference
// unit (probability lambda) or attaches to an existing one with probability
// proportional to (weighted degree + p) for the same class, (+ q) otherwise.
// Repeated stubs to the same unit merge into one edge of summed weight.
LabeledGraph generate_powerlaw(const PowerLawSpec& spec);

inline constexpr std::uint64_t kZipfSupport = 1'000'000;

// X with P(X = k) proportional to k^-exponent on {1, ..., 10^6}.
// Exact rejection sampler (Devroye), truncated by rejection.
std::uint64_t zipf_sample(double exponent, Rng& rng);

}  // namespace bicr

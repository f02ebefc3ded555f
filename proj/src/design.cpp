#include "bicr/design.hpp"

#include <numeric>
#include <string>
#include <vector>

#include "bicr/errors.hpp"
#include "bicr/rng.hpp"

namespace bicr {

namespace {

void check_design_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw ArgumentError("design probability must lie in (0, 1], got " + std::to_string(p));
  }
}

}  // namespace

void DesignSpec::validate() const {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BalancedCluster>) {
          if (d.k_t == 0 || d.k_t >= d.clustering.k()) {
            throw ArgumentError("treated cluster count must satisfy 0 < k_t < k (k_t = " +
                                std::to_string(d.k_t) +
                                ", k = " + std::to_string(d.clustering.k()) + ")");
          }
        } else {
          check_design_probability(d.p);
        }
      },
      kind);
}

std::size_t DesignSpec::n_units() const {
  if (const auto* b = std::get_if<BalancedCluster>(&kind)) return b->clustering.size();
  if (const auto* c = std::get_if<ClusterBernoulli>(&kind)) return c->clustering.size();
  return 0;
}

Clustering DesignSpec::clustering(std::size_t n) const {
  if (const auto* b = std::get_if<BalancedCluster>(&kind)) return b->clustering;
  if (const auto* c = std::get_if<ClusterBernoulli>(&kind)) return c->clustering;
  return Clustering::singletons(n);
}

DesignSpec balanced_cluster_design(std::string name, Clustering c, std::size_t k_t,
                                   std::uint64_t seed) {
  DesignSpec spec{std::move(name), BalancedCluster{std::move(c), k_t}, seed};
  spec.validate();
  return spec;
}

DesignSpec unit_level_design(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ArgumentError("unit-level randomization needs at least two units");
  return balanced_cluster_design("unit", Clustering::singletons(n), n / 2, seed);
}

DesignSpec unit_bernoulli_design(double p, std::uint64_t seed) {
  DesignSpec spec{"bernoulli", UnitBernoulli{p}, seed};
  spec.validate();
  return spec;
}

DesignSpec cluster_bernoulli_design(std::string name, Clustering c, double p, std::uint64_t seed) {
  DesignSpec spec{std::move(name), ClusterBernoulli{std::move(c), p}, seed};
  spec.validate();
  return spec;
}

Assignment sample_assignment(const DesignSpec& spec, std::uint64_t draw_index, std::size_t n) {
  spec.validate();
  const std::size_t expected = spec.n_units();
  if (expected != 0 && expected != n) {
    throw ArgumentError("design covers " + std::to_string(expected) + " units, requested " +
                        std::to_string(n));
  }
  Rng rng = make_rng(spec.seed, draw_index, Stream::design);
  Assignment a;
  a.design = spec.name;
  a.seed = spec.seed;
  a.z.assign(n, -1);

  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, BalancedCluster>) {
          const std::size_t k = d.clustering.k();
          // Partial Fisher-Yates: the first k_t slots form a uniform subset.
          std::vector<std::size_t> order(k);
          std::iota(order.begin(), order.end(), std::size_t{0});
          std::vector<char> treated(k, 0);
          for (std::size_t t = 0; t < d.k_t; ++t) {
            const auto pick = t + static_cast<std::size_t>(uniform_below(rng, k - t));
            std::swap(order[t], order[pick]);
            treated[order[t]] = 1;
          }
          for (std::size_t i = 0; i < n; ++i) a.z[i] = treated[d.clustering.label(i)] ? 1 : -1;
          a.k = k;
          a.k_t = d.k_t;
        } else if constexpr (std::is_same_v<T, UnitBernoulli>) {
          for (std::size_t i = 0; i < n; ++i) a.z[i] = uniform01(rng) < d.p ? 1 : -1;
        } else {
          const std::size_t k = d.clustering.k();
          std::vector<int> value(k);
          for (std::size_t c = 0; c < k; ++c) value[c] = uniform01(rng) < d.p ? 1 : -1;
          for (std::size_t i = 0; i < n; ++i) a.z[i] = value[d.clustering.label(i)];
          a.k = k;
        }
      },
      spec.kind);
  return a;
}

std::pair<std::size_t, std::size_t> treated_counts(const Assignment& a) {
  std::size_t treated = 0;
  for (int v : a.z) treated += v > 0 ? 1 : 0;
  return {treated, a.z.size() - treated};
}

}  // namespace bicr

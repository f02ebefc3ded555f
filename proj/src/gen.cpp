#include "bicr/gen.hpp"

#include <cmath>
#include <map>
#include <string>

#include "bicr/errors.hpp"

namespace bicr {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ArgumentError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

}  // namespace

void SbmSpec::validate() const {
  if (n_groups == 0) throw ArgumentError("n_groups must be positive");
  if (n_experimental % n_groups != 0 || n_interference % n_groups != 0) {
    throw ArgumentError("n_experimental (" + std::to_string(n_experimental) +
                        ") and n_interference (" + std::to_string(n_interference) +
                        ") must both be divisible by n_groups (" + std::to_string(n_groups) + ")");
  }
  check_probability(p_in, "p_in");
  check_probability(p_out, "p_out");
}

LabeledGraph generate_sbm(const SbmSpec& spec) {
  spec.validate();
  const std::size_t exp_block = spec.n_experimental / spec.n_groups;
  const std::size_t int_block = spec.n_interference / spec.n_groups;

  LabeledGraph out;
  out.exp_labels.resize(spec.n_experimental);
  out.int_labels.resize(spec.n_interference);
  for (std::size_t i = 0; i < spec.n_experimental; ++i) out.exp_labels[i] = i / exp_block;
  for (std::size_t s = 0; s < spec.n_interference; ++s) out.int_labels[s] = s / int_block;

  Rng rng = make_rng(spec.seed, 0, Stream::graph);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < spec.n_experimental; ++i) {
    for (std::size_t s = 0; s < spec.n_interference; ++s) {
      const double p = out.exp_labels[i] == out.int_labels[s] ? spec.p_in : spec.p_out;
      if (uniform01(rng) < p) edges.push_back({i, s, 1.0});
    }
  }
  out.graph = BipartiteGraph(spec.n_experimental, spec.n_interference, std::move(edges));
  return out;
}

void PowerLawSpec::validate() const {
  if (n_classes == 0) throw ArgumentError("n_classes must be positive");
  check_probability(lambda, "lambda");
  if (!(p > 0.0) || !(q > 0.0)) throw ArgumentError("affinities p and q must be positive");
  if (!(zipf_exponent > 1.0)) throw ArgumentError("zipf exponent must exceed 1");
}

LabeledGraph generate_powerlaw(const PowerLawSpec& spec) {
  spec.validate();
  const std::size_t k = spec.n_classes;
  Rng rng = make_rng(spec.seed, 0, Stream::graph);

  LabeledGraph out;
  out.exp_labels.resize(spec.n_experimental);
  for (std::size_t i = 0; i < spec.n_experimental; ++i) out.exp_labels[i] = i % k;

  std::vector<double> degree;  // weighted degree of each interference unit
  std::vector<std::size_t>& int_class = out.int_labels;
  std::vector<Edge> edges;
  const double same_class_new = spec.p / (spec.p + static_cast<double>(k - 1) * spec.q);

  for (std::size_t i = 0; i < spec.n_experimental; ++i) {
    const std::size_t cls = out.exp_labels[i];
    const std::uint64_t stubs = 2 * zipf_sample(spec.zipf_exponent, rng);
    std::map<std::size_t, double> merged;
    for (std::uint64_t stub = 0; stub < stubs; ++stub) {
      std::size_t target;
      const bool fresh = degree.empty() || uniform01(rng) < spec.lambda;
      if (fresh) {
        std::size_t c = cls;
        if (k > 1 && !(uniform01(rng) < same_class_new)) {
          const auto other = static_cast<std::size_t>(uniform_below(rng, k - 1));
          c = other < cls ? other : other + 1;
        }
        target = degree.size();
        degree.push_back(0.0);
        int_class.push_back(c);
      } else {
        double total = 0.0;
        for (std::size_t s = 0; s < degree.size(); ++s) {
          total += degree[s] + (int_class[s] == cls ? spec.p : spec.q);
        }
        const double u = uniform01(rng) * total;
        double acc = 0.0;
        target = degree.size() - 1;
        for (std::size_t s = 0; s < degree.size(); ++s) {
          acc += degree[s] + (int_class[s] == cls ? spec.p : spec.q);
          if (u < acc) {
            target = s;
            break;
          }
        }
      }
      degree[target] += 1.0;
      merged[target] += 1.0;
    }
    for (const auto& [s, w] : merged) edges.push_back({i, s, w});
  }

  out.graph = BipartiteGraph(spec.n_experimental, degree.size(), std::move(edges));
  return out;
}

std::uint64_t zipf_sample(double exponent, Rng& rng) {
  if (!(exponent > 1.0)) {
    throw ArgumentError("zipf exponent must exceed 1, got " + std::to_string(exponent));
  }
  const double am1 = exponent - 1.0;
  const double b = std::pow(2.0, am1);
  const double support = static_cast<double>(kZipfSupport);
  for (;;) {
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    const double v = uniform01(rng);
    const double x = std::floor(std::pow(u, -1.0 / am1));
    if (!(x <= support)) continue;
    const double t = std::pow(1.0 + 1.0 / x, am1);
    if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return static_cast<std::uint64_t>(x);
  }
}

}  // namespace bicr

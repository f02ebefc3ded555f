#include "bicr/partition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "bicr/errors.hpp"
#include "bicr/rng.hpp"
#include "parallel_errors.hpp"

namespace bicr {

WeightedGraph::WeightedGraph(std::size_t n, std::span<const Edge> undirected_edges,
                             std::vector<double> node_weights)
    : node_weight_(std::move(node_weights)) {
  if (node_weight_.empty()) node_weight_.assign(n, 1.0);
  if (node_weight_.size() != n) {
    throw ArgumentError("node weight count " + std::to_string(node_weight_.size()) +
                        " does not match node count " + std::to_string(n));
  }
  for (double w : node_weight_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("node weights must be finite and >= 0");
  }

  std::vector<Edge> directed;
  directed.reserve(2 * undirected_edges.size());
  for (const Edge& e : undirected_edges) {
    if (e.exp >= n || e.intf >= n) {
      throw ArgumentError("edge (" + std::to_string(e.exp) + ", " + std::to_string(e.intf) +
                          ") out of range for " + std::to_string(n) + " nodes");
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw ArgumentError("edge weights must be finite and >= 0");
    }
    if (e.exp == e.intf) continue;
    directed.push_back(e);
    directed.push_back({e.intf, e.exp, e.weight});
  }
  std::sort(directed.begin(), directed.end(), [](const Edge& a, const Edge& b) {
    return a.exp != b.exp ? a.exp < b.exp : a.intf < b.intf;
  });

  offsets_.assign(n + 1, 0);
  for (std::size_t idx = 0; idx < directed.size(); ++idx) {
    const Edge& e = directed[idx];
    if (!adj_.empty() && idx > 0 && directed[idx - 1].exp == e.exp &&
        directed[idx - 1].intf == e.intf) {
      adj_.back().weight += e.weight;
    } else {
      adj_.push_back({e.intf, e.weight});
      ++offsets_[e.exp + 1];
    }
    total_ += e.weight;
  }
  total_ /= 2.0;
  for (std::size_t u = 0; u < n; ++u) offsets_[u + 1] += offsets_[u];
}

std::span<const Neighbor> WeightedGraph::neighbors(std::size_t u) const {
  return std::span<const Neighbor>(adj_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
}

WeightedGraph h_partition_graph(const FoldedGraph& folded) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < folded.n(); ++i) {
    for (const Neighbor& nb : folded.row(i)) {
      if (nb.index != i) edges.push_back({i, nb.index, nb.weight});
    }
  }
  return WeightedGraph(folded.n(), edges);
}

WeightedGraph trvar_partition_graph(const BipartiteGraph& g) {
  std::vector<Edge> edges;
  for (std::size_t s = 0; s < g.n_interference(); ++s) {
    const double t_s = g.col_sum(s);
    if (t_s == 0.0) continue;
    const auto nbrs = g.int_neighbors(s);
    for (std::size_t x = 0; x < nbrs.size(); ++x) {
      for (std::size_t y = x + 1; y < nbrs.size(); ++y) {
        const double w = 2.0 * (nbrs[x].weight / t_s) * (nbrs[y].weight / t_s);
        edges.push_back({nbrs[x].index, nbrs[y].index, w});
      }
    }
  }
  return WeightedGraph(g.n_experimental(), edges);
}

WeightedGraph direct_partition_graph(const BipartiteGraph& g) {
  const std::size_t n = g.n_experimental();
  std::vector<Edge> edges;
  edges.reserve(g.edges().size());
  for (const Edge& e : g.edges()) edges.push_back({e.exp, n + e.intf, e.weight});
  std::vector<double> node_weights(n + g.n_interference(), 0.0);
  std::fill(node_weights.begin(), node_weights.begin() + static_cast<std::ptrdiff_t>(n), 1.0);
  return WeightedGraph(n + g.n_interference(), edges, std::move(node_weights));
}

InitMethod parse_init_method(std::string_view name) {
  if (name == "greedy_line") return InitMethod::greedy_line;
  if (name == "random") return InitMethod::random;
  throw ArgumentError("unknown init method '" + std::string(name) +
                      "' (expected greedy_line or random)");
}

void PartitionConfig::validate() const {
  if (k < 2) throw ArgumentError("partitioning needs k >= 2, got " + std::to_string(k));
  if (!(tolerance >= 0.0)) throw ArgumentError("tolerance must be >= 0");
}

double cut_weight(const WeightedGraph& g, std::span<const std::size_t> labels) {
  if (labels.size() != g.n()) throw ArgumentError("label count does not match graph");
  double cut = 0.0;
  for (std::size_t u = 0; u < g.n(); ++u) {
    for (const Neighbor& nb : g.neighbors(u)) {
      if (nb.index > u && labels[u] != labels[nb.index]) cut += nb.weight;
    }
  }
  return cut;
}

namespace {

double total_node_weight(const WeightedGraph& g) {
  double w = 0.0;
  for (std::size_t u = 0; u < g.n(); ++u) w += g.node_weight(u);
  return w;
}

void check_partitionable(const WeightedGraph& g, std::size_t k) {
  if (k < 2) throw ArgumentError("partitioning needs k >= 2, got " + std::to_string(k));
  const double w = total_node_weight(g);
  if (w < static_cast<double>(k)) {
    throw ArgumentError("cannot split " + std::to_string(static_cast<std::size_t>(w)) +
                        " units into " + std::to_string(k) + " nonempty clusters");
  }
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_rng(seed, 0, Stream::partition);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<std::size_t> segment_order(const WeightedGraph& g, std::span<const std::size_t> order,
                                       std::size_t k) {
  const double total = total_node_weight(g);
  std::vector<std::size_t> labels(g.n(), 0);
  double before = 0.0;
  for (std::size_t u : order) {
    const auto seg = static_cast<std::size_t>(std::floor(static_cast<double>(k) * before / total));
    labels[u] = std::min(k - 1, seg);
    before += g.node_weight(u);
  }
  return labels;
}

// Hop-farthest node from `root` within its unvisited component.
std::size_t farthest_from(const WeightedGraph& g, std::size_t root,
                          const std::vector<char>& visited) {
  std::vector<char> seen(g.n(), 0);
  std::deque<std::size_t> queue{root};
  seen[root] = 1;
  std::size_t last = root;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    last = u;
    for (const Neighbor& nb : g.neighbors(u)) {
      if (!seen[nb.index] && !visited[nb.index]) {
        seen[nb.index] = 1;
        queue.push_back(nb.index);
      }
    }
  }
  return last;
}

}  // namespace

std::vector<std::size_t> init_greedy_line(const WeightedGraph& g, std::size_t k,
                                          std::uint64_t seed) {
  check_partitionable(g, k);
  const std::size_t n = g.n();
  const std::vector<std::size_t> perm = seeded_permutation(n, seed);
  std::vector<char> visited(n, 0);
  std::vector<double> attach(n, 0.0);
  std::vector<char> queued(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);

  // Frontier ordered by heaviest attachment to the visited set, then index.
  auto heavier = [&](std::size_t a, std::size_t b) {
    return attach[a] != attach[b] ? attach[a] > attach[b] : a < b;
  };
  std::set<std::size_t, decltype(heavier)> frontier(heavier);

  std::size_t cursor = 0;
  while (order.size() < n) {
    while (visited[perm[cursor]]) ++cursor;
    const std::size_t start = farthest_from(g, perm[cursor], visited);
    frontier.insert(start);
    queued[start] = 1;
    while (!frontier.empty()) {
      const std::size_t u = *frontier.begin();
      frontier.erase(frontier.begin());
      visited[u] = 1;
      order.push_back(u);
      for (const Neighbor& nb : g.neighbors(u)) {
        const std::size_t v = nb.index;
        if (visited[v]) continue;
        if (queued[v]) frontier.erase(v);
        attach[v] += nb.weight;
        queued[v] = 1;
        frontier.insert(v);
      }
    }
  }
  return segment_order(g, order, k);
}

namespace {

class SwapSearch {
 public:
  SwapSearch(const WeightedGraph& g, std::vector<std::size_t> labels, std::size_t k,
             double tolerance)
      : g_(g), k_(k), tolerance_(tolerance), labels_(std::move(labels)),
        conn_(g.n() * k, 0.0), size_(k, 0.0), scratch_(g.n(), 0.0) {
    for (std::size_t u = 0; u < g_.n(); ++u) {
      size_[labels_[u]] += g_.node_weight(u);
      for (const Neighbor& nb : g_.neighbors(u)) conn_[u * k_ + labels_[nb.index]] += nb.weight;
    }
    eps_ = 1e-12 * std::max(1.0, g_.total_edge_weight());
  }

  // One sweep over units; returns true if any swap was applied.
  bool pass() {
    bool improved = false;
    for (std::size_t u = 0; u < g_.n(); ++u) {
      for (const Neighbor& nb : g_.neighbors(u)) scratch_[nb.index] = nb.weight;
      const std::size_t a = labels_[u];
      double best_gain = eps_;
      std::size_t best_v = g_.n();
      for (std::size_t v = 0; v < g_.n(); ++v) {
        const std::size_t c = labels_[v];
        if (c == a) continue;
        const double gain = conn_[u * k_ + c] - conn_[u * k_ + a] + conn_[v * k_ + a] -
                            conn_[v * k_ + c] - 2.0 * scratch_[v];
        if (gain > best_gain && balanced_after(u, v)) {
          best_gain = gain;
          best_v = v;
        }
      }
      for (const Neighbor& nb : g_.neighbors(u)) scratch_[nb.index] = 0.0;
      if (best_v != g_.n()) {
        swap(u, best_v);
        improved = true;
      }
    }
    return improved;
  }

  const std::vector<std::size_t>& labels() const { return labels_; }

 private:
  bool balanced_after(std::size_t u, std::size_t v) const {
    const double wu = g_.node_weight(u);
    const double wv = g_.node_weight(v);
    if (wu == wv) return true;
    const std::size_t a = labels_[u];
    const std::size_t c = labels_[v];
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t l = 0; l < k_; ++l) {
      double s = size_[l];
      if (l == a) s += wv - wu;
      if (l == c) s += wu - wv;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    return lo > 0.0 && sizes_within_tolerance(lo, hi, tolerance_);
  }

  void move(std::size_t u, std::size_t to) {
    const std::size_t from = labels_[u];
    for (const Neighbor& nb : g_.neighbors(u)) {
      conn_[nb.index * k_ + from] -= nb.weight;
      conn_[nb.index * k_ + to] += nb.weight;
    }
    size_[from] -= g_.node_weight(u);
    size_[to] += g_.node_weight(u);
    labels_[u] = to;
  }

  void swap(std::size_t u, std::size_t v) {
    const std::size_t a = labels_[u];
    const std::size_t c = labels_[v];
    move(u, c);
    move(v, a);
  }

  const WeightedGraph& g_;
  std::size_t k_;
  double tolerance_;
  std::vector<std::size_t> labels_;
  std::vector<double> conn_;
  std::vector<double> size_;
  std::vector<double> scratch_;
  double eps_ = 0.0;
};

}  // namespace

PartitionResult partition_graph(const WeightedGraph& g, const PartitionConfig& cfg) {
  cfg.validate();
  check_partitionable(g, cfg.k);
  std::vector<std::size_t> init;
  if (cfg.init == InitMethod::greedy_line) {
    init = init_greedy_line(g, cfg.k, cfg.seed);
  } else {
    const auto perm = seeded_permutation(g.n(), cfg.seed);
    init = segment_order(g, perm, cfg.k);
  }

  PartitionResult result;
  result.k = cfg.k;
  SwapSearch search(g, std::move(init), cfg.k, cfg.tolerance);
  result.cut_history.push_back(cut_weight(g, search.labels()));
  for (std::size_t p = 0; p < cfg.max_passes; ++p) {
    const bool improved = search.pass();
    ++result.passes;
    result.cut_history.push_back(cut_weight(g, search.labels()));
    if (!improved) break;
  }
  result.labels = search.labels();
  result.cut = result.cut_history.back();
  return result;
}

Clustering balanced_partition(const WeightedGraph& g, const PartitionConfig& cfg) {
  PartitionResult r = partition_graph(g, cfg);
  return Clustering(std::move(r.labels), cfg.k, cfg.tolerance);
}

PartitionResult best_of(const WeightedGraph& g, const PartitionConfig& cfg, std::size_t starts) {
  if (starts == 0) throw ArgumentError("best_of needs at least one start");
  cfg.validate();
  check_partitionable(g, cfg.k);
  std::vector<PartitionResult> results(starts);
  detail::ParallelErrors errors;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t s = 0; s < starts; ++s) {
    errors.run(s, [&] {
      PartitionConfig local = cfg;
      if (s > 0) local.seed = derive_seed(cfg.seed, s, Stream::partition);
      results[s] = partition_graph(g, local);
    });
  }
  errors.rethrow();
  std::size_t best = 0;
  for (std::size_t s = 1; s < starts; ++s) {
    if (results[s].cut < results[best].cut) best = s;
  }
  return std::move(results[best]);
}

Clustering direct_clustering(const BipartiteGraph& g, const PartitionConfig& cfg) {
  const WeightedGraph joint = direct_partition_graph(g);
  PartitionResult r = partition_graph(joint, cfg);
  r.labels.resize(g.n_experimental());
  return Clustering(std::move(r.labels), cfg.k, cfg.tolerance);
}

}  // namespace bicr

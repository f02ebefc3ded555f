#include "bicr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bicr/errors.hpp"

namespace bicr {

std::string NormalizationMode::code() const {
  std::string out;
  out += dose_normalized ? 'n' : 'u';
  out += exposure_normalized ? 'n' : 'u';
  return out;
}

NormalizationMode NormalizationMode::parse(std::string_view code) {
  auto flag = [&](char c) {
    if (c == 'n') return true;
    if (c == 'u') return false;
    throw ArgumentError("normalization mode must be two of 'n'/'u', got '" + std::string(code) + "'");
  };
  if (code.size() != 2) {
    throw ArgumentError("normalization mode must be two of 'n'/'u', got '" + std::string(code) + "'");
  }
  return {flag(code[0]), flag(code[1])};
}

BipartiteGraph::BipartiteGraph(std::size_t n_experimental, std::size_t n_interference,
                               std::vector<Edge> edges)
    : n_exp_(n_experimental), n_int_(n_interference), edges_(std::move(edges)) {
  for (const Edge& e : edges_) {
    if (e.exp >= n_exp_ || e.intf >= n_int_) {
      throw ArgumentError("edge (" + std::to_string(e.exp) + ", " + std::to_string(e.intf) +
                          ") is out of range for a " + std::to_string(n_exp_) + " x " +
                          std::to_string(n_int_) + " graph");
    }
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw ArgumentError("edge (" + std::to_string(e.exp) + ", " + std::to_string(e.intf) +
                          ") has invalid weight " + std::to_string(e.weight));
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.exp != b.exp ? a.exp < b.exp : a.intf < b.intf;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].exp == edges_[k - 1].exp && edges_[k].intf == edges_[k - 1].intf) {
      throw ArgumentError("duplicate edge (" + std::to_string(edges_[k].exp) + ", " +
                          std::to_string(edges_[k].intf) + ")");
    }
  }

  row_sum_.assign(n_exp_, 0.0);
  col_sum_.assign(n_int_, 0.0);
  exp_offsets_.assign(n_exp_ + 1, 0);
  int_offsets_.assign(n_int_ + 1, 0);
  for (const Edge& e : edges_) {
    row_sum_[e.exp] += e.weight;
    col_sum_[e.intf] += e.weight;
    ++exp_offsets_[e.exp + 1];
    ++int_offsets_[e.intf + 1];
  }
  for (std::size_t i = 0; i < n_exp_; ++i) exp_offsets_[i + 1] += exp_offsets_[i];
  for (std::size_t s = 0; s < n_int_; ++s) int_offsets_[s + 1] += int_offsets_[s];

  exp_adj_.resize(edges_.size());
  int_adj_.resize(edges_.size());
  std::vector<std::size_t> exp_fill(exp_offsets_.begin(), exp_offsets_.end() - 1);
  std::vector<std::size_t> int_fill(int_offsets_.begin(), int_offsets_.end() - 1);
  // Edges are sorted by (exp, intf), so both adjacency lists come out sorted.
  for (const Edge& e : edges_) {
    exp_adj_[exp_fill[e.exp]++] = {e.intf, e.weight};
    int_adj_[int_fill[e.intf]++] = {e.exp, e.weight};
  }
}

std::span<const Neighbor> BipartiteGraph::exp_neighbors(std::size_t i) const {
  return std::span<const Neighbor>(exp_adj_).subspan(exp_offsets_[i],
                                                     exp_offsets_[i + 1] - exp_offsets_[i]);
}

std::span<const Neighbor> BipartiteGraph::int_neighbors(std::size_t s) const {
  return std::span<const Neighbor>(int_adj_).subspan(int_offsets_[s],
                                                     int_offsets_[s + 1] - int_offsets_[s]);
}

void Assignment::validate() const {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] != 1 && z[i] != -1) {
      throw ArgumentError("assignment entry " + std::to_string(i) + " is " + std::to_string(z[i]) +
                          ", expected -1 or +1");
    }
  }
}

Assignment Assignment::constant(std::size_t n, int value) {
  Assignment a;
  a.z.assign(n, value);
  a.design = value > 0 ? "all_treated" : "all_control";
  a.validate();
  return a;
}

std::vector<double> compute_doses(const BipartiteGraph& g, const Assignment& z,
                                  NormalizationMode mode) {
  if (z.size() != g.n_experimental()) {
    throw ArgumentError("assignment has " + std::to_string(z.size()) + " entries, graph has " +
                        std::to_string(g.n_experimental()) + " experimental units");
  }
  std::vector<double> doses(g.n_interference(), 0.0);
  for (std::size_t s = 0; s < g.n_interference(); ++s) {
    const double total = g.col_sum(s);
    if (total == 0.0) continue;
    double acc = 0.0;
    for (const Neighbor& nb : g.int_neighbors(s)) acc += nb.weight * z.z[nb.index];
    doses[s] = mode.dose_normalized ? acc / total : acc;
  }
  return doses;
}

std::vector<double> compute_exposures(const BipartiteGraph& g, std::span<const double> doses,
                                      NormalizationMode mode) {
  if (doses.size() != g.n_interference()) {
    throw ArgumentError("dose vector has " + std::to_string(doses.size()) + " entries, graph has " +
                        std::to_string(g.n_interference()) + " interference units");
  }
  std::vector<double> exposures(g.n_experimental(), 0.0);
  for (std::size_t i = 0; i < g.n_experimental(); ++i) {
    const double total = g.row_sum(i);
    if (total == 0.0) {
      exposures[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double acc = 0.0;
    for (const Neighbor& nb : g.exp_neighbors(i)) acc += nb.weight * doses[nb.index];
    exposures[i] = mode.exposure_normalized ? acc / total : acc;
  }
  return exposures;
}

bool is_self_exposed(double exposure) { return std::isnan(exposure); }

void resolve_self_exposed(std::vector<double>& exposures, const Assignment& z) {
  if (exposures.size() != z.size()) {
    throw ArgumentError("exposure and assignment lengths differ");
  }
  for (std::size_t i = 0; i < exposures.size(); ++i) {
    if (is_self_exposed(exposures[i])) exposures[i] = z.z[i];
  }
}

ExposureProfile compute_profile(const BipartiteGraph& g, const Assignment& z,
                                NormalizationMode mode) {
  ExposureProfile p;
  p.mode = mode;
  p.doses = compute_doses(g, z, mode);
  p.exposures = compute_exposures(g, p.doses, mode);
  resolve_self_exposed(p.exposures, z);
  return p;
}

FoldedGraph::FoldedGraph(std::size_t n, std::vector<std::size_t> offsets,
                         std::vector<Neighbor> entries, NormalizationMode mode)
    : n_(n), offsets_(std::move(offsets)), entries_(std::move(entries)), mode_(mode) {
  if (offsets_.size() != n_ + 1 || offsets_.back() != entries_.size()) {
    throw ArgumentError("folded graph offsets do not match its entries");
  }
}

std::span<const Neighbor> FoldedGraph::row(std::size_t i) const {
  return std::span<const Neighbor>(entries_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
}

double FoldedGraph::value(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  auto it = std::lower_bound(r.begin(), r.end(), j,
                             [](const Neighbor& nb, std::size_t col) { return nb.index < col; });
  return (it != r.end() && it->index == j) ? it->weight : 0.0;
}

double FoldedGraph::row_total(std::size_t i) const {
  double acc = 0.0;
  for (const Neighbor& nb : row(i)) acc += nb.weight;
  return acc;
}

std::vector<double> FoldedGraph::apply(std::span<const int> z) const {
  if (z.size() != n_) throw ArgumentError("assignment length does not match folded graph");
  std::vector<double> e(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (row_empty(i)) {
      e[i] = z[i];
      continue;
    }
    double acc = 0.0;
    for (const Neighbor& nb : row(i)) acc += nb.weight * z[nb.index];
    e[i] = acc;
  }
  return e;
}

std::vector<double> FoldedGraph::apply(std::span<const double> x) const {
  if (x.size() != n_) throw ArgumentError("vector length does not match folded graph");
  std::vector<double> e(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (row_empty(i)) {
      e[i] = x[i];
      continue;
    }
    double acc = 0.0;
    for (const Neighbor& nb : row(i)) acc += nb.weight * x[nb.index];
    e[i] = acc;
  }
  return e;
}

bool operator==(const FoldedGraph& a, const FoldedGraph& b) {
  if (a.n_ != b.n_ || a.mode_ != b.mode_ || a.offsets_ != b.offsets_ ||
      a.entries_.size() != b.entries_.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.entries_.size(); ++k) {
    if (a.entries_[k].index != b.entries_[k].index || a.entries_[k].weight != b.entries_[k].weight) {
      return false;
    }
  }
  return true;
}

FoldedGraph fold_graph(const BipartiteGraph& g, NormalizationMode mode) {
  const std::size_t n = g.n_experimental();
  std::vector<std::vector<Neighbor>> rows(n);

#pragma omp parallel
  {
    std::vector<double> acc(n, 0.0);
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> touched;
#pragma omp for schedule(dynamic, 16)
    for (std::size_t i = 0; i < n; ++i) {
      const double s_i = g.row_sum(i);
      if (s_i == 0.0) continue;
      touched.clear();
      for (const Neighbor& is : g.exp_neighbors(i)) {
        const double t_s = g.col_sum(is.index);
        if (t_s == 0.0) continue;  // only zero-weight edges reach s
        const double a = mode.exposure_normalized ? is.weight / s_i : is.weight;
        for (const Neighbor& js : g.int_neighbors(is.index)) {
          const double b = mode.dose_normalized ? js.weight / t_s : js.weight;
          if (!seen[js.index]) {
            seen[js.index] = 1;
            touched.push_back(js.index);
          }
          acc[js.index] += a * b;
        }
      }
      std::sort(touched.begin(), touched.end());
      auto& out = rows[i];
      out.reserve(touched.size());
      for (std::size_t j : touched) {
        out.push_back({j, acc[j]});
        acc[j] = 0.0;
        seen[j] = 0;
      }
    }
  }

  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + rows[i].size();
  std::vector<Neighbor> entries;
  entries.reserve(offsets.back());
  for (auto& r : rows) entries.insert(entries.end(), r.begin(), r.end());
  return FoldedGraph(n, std::move(offsets), std::move(entries), mode);
}

}  // namespace bicr

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bicr {

// One weighted edge between experimental unit `exp` and interference unit `intf`.
struct Edge {
  std::size_t exp = 0;
  std::size_t intf = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
  std::size_t index = 0;
  double weight = 0.0;
};

// Which of the two averaging stages divide by the incident weight.
// The fully normalized mode gives the weighted-average dose and exposure;
// dropping a normalization turns that stage into a weighted sum.
struct NormalizationMode {
  bool dose_normalized = true;
  bool exposure_normalized = true;

  static constexpr NormalizationMode full() { return {true, true}; }
  bool fully_normalized() const { return dose_normalized && exposure_normalized; }

  // Two letters, dose first: "nn", "nu", "un", "uu" (n = normalized).
  std::string code() const;
  static NormalizationMode parse(std::string_view code);

  friend bool operator==(const NormalizationMode&, const NormalizationMode&) = default;
};

// Immutable weighted bipartite graph between N experimental units and M
// interference units. Edges are canonicalized (sorted by (exp, intf)) at
// construction and indexed from both sides.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  // Throws ArgumentError on out-of-range ids, duplicate pairs, or weights
  // that are negative, NaN or infinite.
  BipartiteGraph(std::size_t n_experimental, std::size_t n_interference, std::vector<Edge> edges);

  std::size_t n_experimental() const { return n_exp_; }
  std::size_t n_interference() const { return n_int_; }
  std::span<const Edge> edges() const { return edges_; }

  // S_i: total weight incident to experimental unit i.
  double row_sum(std::size_t i) const { return row_sum_[i]; }
  // T_s: total weight incident to interference unit s.
  double col_sum(std::size_t s) const { return col_sum_[s]; }
  std::span<const double> row_sums() const { return row_sum_; }
  std::span<const double> col_sums() const { return col_sum_; }

  // Interference neighbors of experimental unit i, sorted by index.
  std::span<const Neighbor> exp_neighbors(std::size_t i) const;
  // Experimental neighbors of interference unit s, sorted by index.
  std::span<const Neighbor> int_neighbors(std::size_t s) const;

 private:
  std::size_t n_exp_ = 0;
  std::size_t n_int_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> row_sum_;
  std::vector<double> col_sum_;
  std::vector<std::size_t> exp_offsets_;
  std::vector<Neighbor> exp_adj_;
  std::vector<std::size_t> int_offsets_;
  std::vector<Neighbor> int_adj_;
};

// A treatment assignment Z in {-1, +1}^N plus the design that produced it.
struct Assignment {
  std::vector<int> z;
  std::size_t k = 0;    // cluster count (0 when not a cluster design)
  std::size_t k_t = 0;  // treated cluster count
  std::string design;
  std::uint64_t seed = 0;

  std::size_t size() const { return z.size(); }
  // Throws ArgumentError unless every entry is exactly -1 or +1.
  void validate() const;

  static Assignment constant(std::size_t n, int value);
};

struct ExposureProfile {
  std::vector<double> doses;
  std::vector<double> exposures;
  NormalizationMode mode;
};

// d_s = sum_i w_is z_i, divided by T_s when the dose is normalized.
// Isolated interference units (T_s = 0) get dose 0 in every mode.
std::vector<double> compute_doses(const BipartiteGraph& g, const Assignment& z,
                                  NormalizationMode mode = NormalizationMode::full());

// e_i = sum_s w_is d_s, divided by S_i when the exposure is normalized.
// Isolated experimental units (S_i = 0) are reported as NaN, the
// "self-exposed" sentinel; resolve_self_exposed() replaces it with z_i.
std::vector<double> compute_exposures(const BipartiteGraph& g, std::span<const double> doses,
                                      NormalizationMode mode = NormalizationMode::full());

bool is_self_exposed(double exposure);
void resolve_self_exposed(std::vector<double>& exposures, const Assignment& z);

// Doses and resolved exposures in one call (the two-stage computation).
ExposureProfile compute_profile(const BipartiteGraph& g, const Assignment& z,
                                NormalizationMode mode = NormalizationMode::full());

// Sparse N x N matrix C with e = C z. Rows are sorted by column and keep the
// diagonal; experimental units without edges have an empty row.
class FoldedGraph {
 public:
  FoldedGraph() = default;
  FoldedGraph(std::size_t n, std::vector<std::size_t> offsets, std::vector<Neighbor> entries,
              NormalizationMode mode);

  std::size_t n() const { return n_; }
  NormalizationMode mode() const { return mode_; }
  std::span<const Neighbor> row(std::size_t i) const;
  std::size_t nnz() const { return entries_.size(); }
  // c_ij, or 0 when the pair is absent.
  double value(std::size_t i, std::size_t j) const;
  double row_total(std::size_t i) const;
  bool row_empty(std::size_t i) const { return offsets_[i] == offsets_[i + 1]; }

  // e = C z, with empty rows resolved to e_i = z_i.
  std::vector<double> apply(std::span<const int> z) const;
  // Same product for a real-valued vector (used for expected exposures).
  std::vector<double> apply(std::span<const double> x) const;

  friend bool operator==(const FoldedGraph&, const FoldedGraph&);

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> entries_;
  NormalizationMode mode_;
};

// c_ij = sum_s a(i,s) b(j,s), a = w_is / S_i (or w_is), b = w_js / T_s (or w_js).
// Rows are computed in parallel; each row is accumulated in a fixed order, so
// the result is bit-identical to reference::fold_graph.
FoldedGraph fold_graph(const BipartiteGraph& g, NormalizationMode mode = NormalizationMode::full());

}  // namespace bicr

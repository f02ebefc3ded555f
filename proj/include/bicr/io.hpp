#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bicr/graph.hpp"
#include "bicr/objective.hpp"
#include "bicr/outcome.hpp"

namespace bicr {

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

// File open or write failures throw ResourceError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

// Graph TSV: optional "# n_experimental=N n_interference=M" line, header
// "exp_id\tint_id\tweight", one edge per line. Without the metadata line the
// sizes are max id + 1. Paths ending in ".json" use the JSON variant
// {"n_experimental", "n_interference", "edges": [{"exp_id", "int_id", "weight"}]}.
BipartiteGraph parse_graph_tsv(std::string_view text);
std::string format_graph_tsv(const BipartiteGraph& g);
BipartiteGraph parse_graph_json(std::string_view text);
std::string format_graph_json(const BipartiteGraph& g);
BipartiteGraph read_graph(const std::string& path);
void write_graph(const std::string& path, const BipartiteGraph& g);

// Folded TSV: "# n=N mode=nn" then header "i\tj\tweight".
FoldedGraph parse_folded_tsv(std::string_view text);
std::string format_folded_tsv(const FoldedGraph& f);
bool looks_like_folded_tsv(std::string_view text);

// Clustering CSV "unit_id,cluster_id" with dense unit ids. Returns the label
// of every listed unit in id order.
std::vector<std::size_t> parse_clustering_csv(std::string_view text);
std::string format_clustering_csv(std::span<const std::size_t> labels);
// Keeps units [0, n) when the file also labels interference units.
Clustering read_clustering(const std::string& path, std::size_t n,
                           double tolerance = std::numeric_limits<double>::infinity());

// Ground-truth labels "unit_id,label,side" with side exp or int.
std::string format_labels_csv(std::span<const std::size_t> exp_labels,
                              std::span<const std::size_t> int_labels);

// Assignment CSV "unit_id,z" with z in {-1, 1}.
Assignment parse_assignment_csv(std::string_view text);
std::string format_assignment_csv(const Assignment& a);

// Coefficients CSV "unit_id,alpha,beta,gamma".
LinearCoefficients parse_coefficients_csv(std::string_view text);
std::string format_coefficients_csv(const LinearCoefficients& c);

}  // namespace bicr

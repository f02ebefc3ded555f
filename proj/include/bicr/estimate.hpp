#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bicr/design.hpp"
#include "bicr/graph.hpp"

namespace bicr {

// Treated-arm mean minus control-arm mean, with arm sizes taken from the
// realized assignment. Throws EstimationError if either arm is empty.
double dim_estimate(std::span<const double> y, const Assignment& a);

// Unit i is fully treated when z_i = +1 and |z_i - e_i| < delta, fully
// controlled when z_i = -1 and the same bound holds.
bool fully_treated(int z, double exposure, double delta);
bool fully_controlled(int z, double exposure, double delta);

struct PropensityTable {
  std::vector<double> treated;  // P(fully treated) per unit
  std::vector<double> control;  // P(fully controlled) per unit
  std::size_t draws = 0;
  double delta_exposure = 0.0;
  std::string design;

  std::size_t size() const { return treated.size(); }
  std::size_t zero_treated() const;
  std::size_t zero_control() const;
};

// Empirical full-exposure frequencies over `draws` sampled assignments.
PropensityTable estimate_propensities(const DesignSpec& spec, const BipartiteGraph& g,
                                      double delta_exposure, std::size_t draws,
                                      NormalizationMode mode = NormalizationMode::full());

struct IpsResult {
  double estimate = 0.0;
  std::size_t treated_used = 0;
  std::size_t control_used = 0;
  std::size_t skipped = 0;  // fully exposed units whose recorded propensity is 0
};

// (1/N) sum_i [Y_i 1{fully treated} / P_i(T) - Y_i 1{fully controlled} / P_i(C)].
IpsResult ips_estimate(std::span<const double> y, const Assignment& a,
                       std::span<const double> exposures, const PropensityTable& table);

struct IpsVariance {
  double value = 0.0;  // +inf when any unit is flagged
  std::vector<std::size_t> infinite_units;

  bool finite() const { return infinite_units.empty(); }
};

// (1/N^2) sum_i [Y_{i,T}^2 / P_i(T) + Y_{i,C}^2 / P_i(C)] for known pure outcomes.
IpsVariance ips_variance_bernoulli(std::span<const double> y_pure_treated,
                                   std::span<const double> y_pure_control,
                                   const PropensityTable& table);

}  // namespace bicr

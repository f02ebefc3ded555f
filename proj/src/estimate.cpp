#include "bicr/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bicr/errors.hpp"
#include "parallel_errors.hpp"

namespace bicr {

double dim_estimate(std::span<const double> y, const Assignment& a) {
  if (y.size() != a.size()) {
    throw ArgumentError("outcome length " + std::to_string(y.size()) +
                        " does not match assignment length " + std::to_string(a.size()));
  }
  double sum_t = 0.0;
  double sum_c = 0.0;
  std::size_t n_t = 0;
  std::size_t n_c = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (a.z[i] > 0) {
      sum_t += y[i];
      ++n_t;
    } else {
      sum_c += y[i];
      ++n_c;
    }
  }
  if (n_t == 0 || n_c == 0) {
    throw EstimationError("difference in means needs both arms (treated " + std::to_string(n_t) +
                          ", control " + std::to_string(n_c) + ")");
  }
  return sum_t / static_cast<double>(n_t) - sum_c / static_cast<double>(n_c);
}

bool fully_treated(int z, double exposure, double delta) {
  return z > 0 && std::abs(1.0 - exposure) < delta;
}

bool fully_controlled(int z, double exposure, double delta) {
  return z < 0 && std::abs(-1.0 - exposure) < delta;
}

std::size_t PropensityTable::zero_treated() const {
  return static_cast<std::size_t>(std::count(treated.begin(), treated.end(), 0.0));
}

std::size_t PropensityTable::zero_control() const {
  return static_cast<std::size_t>(std::count(control.begin(), control.end(), 0.0));
}

PropensityTable estimate_propensities(const DesignSpec& spec, const BipartiteGraph& g,
                                      double delta_exposure, std::size_t draws,
                                      NormalizationMode mode) {
  if (draws == 0) throw ArgumentError("propensity estimation needs at least one draw");
  if (!(delta_exposure > 0.0)) throw ArgumentError("exposure threshold must be positive");
  spec.validate();
  const std::size_t n = g.n_experimental();
  std::vector<std::size_t> count_t(n, 0);
  std::vector<std::size_t> count_c(n, 0);

  detail::ParallelErrors errors;
#pragma omp parallel
  {
    std::vector<std::size_t> local_t(n, 0);
    std::vector<std::size_t> local_c(n, 0);
#pragma omp for schedule(static) nowait
    for (std::size_t d = 0; d < draws; ++d) {
      errors.run(d, [&] {
        const Assignment a = sample_assignment(spec, d, n);
        const ExposureProfile p = compute_profile(g, a, mode);
        for (std::size_t i = 0; i < n; ++i) {
          local_t[i] += fully_treated(a.z[i], p.exposures[i], delta_exposure) ? 1 : 0;
          local_c[i] += fully_controlled(a.z[i], p.exposures[i], delta_exposure) ? 1 : 0;
        }
      });
    }
#pragma omp critical
    for (std::size_t i = 0; i < n; ++i) {
      count_t[i] += local_t[i];
      count_c[i] += local_c[i];
    }
  }
  errors.rethrow();

  PropensityTable table;
  table.draws = draws;
  table.delta_exposure = delta_exposure;
  table.design = spec.name;
  table.treated.resize(n);
  table.control.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    table.treated[i] = static_cast<double>(count_t[i]) / static_cast<double>(draws);
    table.control[i] = static_cast<double>(count_c[i]) / static_cast<double>(draws);
  }
  return table;
}

IpsResult ips_estimate(std::span<const double> y, const Assignment& a,
                       std::span<const double> exposures, const PropensityTable& table) {
  const std::size_t n = a.size();
  if (y.size() != n || exposures.size() != n || table.size() != n) {
    throw ArgumentError("IPS inputs must all have the assignment's length " + std::to_string(n));
  }
  if (n == 0) throw EstimationError("IPS needs at least one unit");
  IpsResult r;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (fully_treated(a.z[i], exposures[i], table.delta_exposure)) {
      if (table.treated[i] == 0.0) {
        ++r.skipped;
        continue;
      }
      sum += y[i] / table.treated[i];
      ++r.treated_used;
    } else if (fully_controlled(a.z[i], exposures[i], table.delta_exposure)) {
      if (table.control[i] == 0.0) {
        ++r.skipped;
        continue;
      }
      sum -= y[i] / table.control[i];
      ++r.control_used;
    }
  }
  r.estimate = sum / static_cast<double>(n);
  return r;
}

IpsVariance ips_variance_bernoulli(std::span<const double> y_pure_treated,
                                   std::span<const double> y_pure_control,
                                   const PropensityTable& table) {
  const std::size_t n = table.size();
  if (y_pure_treated.size() != n || y_pure_control.size() != n) {
    throw ArgumentError("pure outcome vectors must have length " + std::to_string(n));
  }
  IpsVariance v;
  if (n == 0) return v;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (table.treated[i] == 0.0 || table.control[i] == 0.0) {
      v.infinite_units.push_back(i);
      continue;
    }
    sum += y_pure_treated[i] * y_pure_treated[i] / table.treated[i] +
           y_pure_control[i] * y_pure_control[i] / table.control[i];
  }
  const double nn = static_cast<double>(n);
  v.value = v.finite() ? sum / (nn * nn) : std::numeric_limits<double>::infinity();
  return v;
}

}  // namespace bicr

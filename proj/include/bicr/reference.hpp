#pragma once

#include <span>
#include <vector>

#include "bicr/estimate.hpp"
#include "bicr/graph.hpp"
#include "bicr/harness.hpp"

// Single-threaded implementations of the parallel kernels. They are kept
// for testing (outputs must be bit-identical) and for benchmarking.
namespace bicr::reference {

// Dense accumulation over interference units.
FoldedGraph fold_graph(const BipartiteGraph& g, NormalizationMode mode = NormalizationMode::full());

PropensityTable estimate_propensities(const DesignSpec& spec, const BipartiteGraph& g,
                                      double delta_exposure, std::size_t draws,
                                      NormalizationMode mode = NormalizationMode::full());

BootstrapIntervals bootstrap_metrics(std::span<const double> estimates, double tau,
                                     std::span<const double> tau_replicates,
                                     std::size_t resamples, std::uint64_t seed);

std::vector<EvalReport> run_experiment(const BipartiteGraph& g, std::span<const DesignSpec> designs,
                                       const OutcomeModel& model, const ExperimentConfig& cfg);

}  // namespace bicr::reference

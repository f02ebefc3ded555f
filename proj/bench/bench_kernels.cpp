#include <benchmark/benchmark.h>

#include "bicr/design.hpp"
#include "bicr/gen.hpp"
#include "bicr/graph.hpp"
#include "bicr/harness.hpp"
#include "bicr/outcome.hpp"
#include "bicr/reference.hpp"

namespace {

const bicr::LabeledGraph& sbm_graph() {
  static const bicr::LabeledGraph g =
      bicr::generate_sbm({400, 800, 10, 0.5, 0.005, 11});
  return g;
}

void BM_FoldParallel(benchmark::State& state) {
  const auto& g = sbm_graph().graph;
  for (auto _ : state) benchmark::DoNotOptimize(bicr::fold_graph(g));
}

void BM_FoldReference(benchmark::State& state) {
  const auto& g = sbm_graph().graph;
  for (auto _ : state) benchmark::DoNotOptimize(bicr::reference::fold_graph(g));
}

struct ExperimentInput {
  std::vector<bicr::DesignSpec> designs;
  bicr::OutcomeModel model;
  bicr::ExperimentConfig cfg;
};

ExperimentInput experiment_input() {
  const auto& lg = sbm_graph();
  ExperimentInput in{
      {bicr::balanced_cluster_design("truth", bicr::Clustering(lg.exp_labels, 10), 5, 3),
       bicr::unit_level_design(lg.graph.n_experimental(), 3)},
      bicr::LinearOutcome{bicr::preset_coefficients(lg.graph.n_experimental(), 5)},
      {}};
  in.cfg.draws = 500;
  in.cfg.seed = 9;
  in.cfg.bootstrap_resamples = 200;
  return in;
}

void BM_ExperimentParallel(benchmark::State& state) {
  const auto in = experiment_input();
  for (auto _ : state) {
    benchmark::DoNotOptimize(bicr::run_experiment(sbm_graph().graph, in.designs, in.model, in.cfg));
  }
}

void BM_ExperimentReference(benchmark::State& state) {
  const auto in = experiment_input();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bicr::reference::run_experiment(sbm_graph().graph, in.designs, in.model, in.cfg));
  }
}

BENCHMARK(BM_FoldParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FoldReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentReference)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

// Acceptance checks. Each criterion prints one PASS or FAIL line with the
// measured quantities; the exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/test_support.hpp"
#include "bicr/design.hpp"
#include "bicr/estimate.hpp"
#include "bicr/gen.hpp"
#include "bicr/harness.hpp"
#include "bicr/io.hpp"
#include "bicr/objective.hpp"
#include "bicr/outcome.hpp"
#include "bicr/partition.hpp"

namespace fs = std::filesystem;
using namespace bicr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

bool overlap(const Interval& a, const Interval& b) { return a.lo <= b.hi && b.lo <= a.hi; }

std::string interval_text(const Interval& iv) {
  return fmt(iv.value) + " [" + fmt(iv.lo) + ", " + fmt(iv.hi) + "]";
}

Clustering h_clustering(const BipartiteGraph& g, std::size_t k, std::uint64_t seed,
                        std::size_t starts = 4) {
  const WeightedGraph wg = h_partition_graph(fold_graph(g));
  const PartitionResult r = best_of(wg, {k, 0.1, 20, InitMethod::greedy_line, seed}, starts);
  return Clustering(r.labels, k, 0.1);
}

EvalReport evaluate_one(const BipartiteGraph& g, const DesignSpec& design, const OutcomeModel& model,
                        const ExperimentConfig& cfg) {
  return run_experiment(g, std::span(&design, 1), model, cfg).front();
}

// 1. Closed-form linear bias against exhaustive enumeration.
Outcome closed_form_bias() {
  Rng rng = make_rng(1, 0, Stream::graph);
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 200; ++inst) {
    const std::size_t k = 2 + uniform_below(rng, 3);
    const std::size_t per = 1 + uniform_below(rng, 12 / k);
    const std::size_t n = k * per;
    const std::size_t m = 1 + uniform_below(rng, 16);
    const double density = 0.1 + 0.5 * uniform01(rng);
    const std::size_t k_t = 1 + uniform_below(rng, k - 1);
    const BipartiteGraph g = test::random_graph(n, m, density, 1000 + inst);
    const Clustering c = test::random_equal_clustering(n, k, inst);
    const LinearCoefficients coef = preset_coefficients(n, inst);
    const double exact = exact_bias_linear(fold_graph(g), c, coef.gamma);
    const double brute = brute_force_bias(g, c, k_t, LinearOutcome{coef});
    worst = std::max(worst, std::abs(exact - brute));
  }
  return {worst <= 1e-10, "200 instances, max |exact - enumerated| = " + fmt(worst, 3)};
}

// 2. Monte-Carlo bias converges to the closed form.
Outcome monte_carlo_consistency() {
  std::size_t within = 0;
  double worst_z = 0.0;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    const BipartiteGraph g = test::random_graph(60, 40, 0.08, 2000 + inst);
    const Clustering c = test::random_equal_clustering(60, 4, 2000 + inst);
    const LinearCoefficients coef = preset_coefficients(60, 2000 + inst);
    ExperimentConfig cfg;
    cfg.draws = 10000;
    cfg.seed = inst;
    const EvalReport r =
        evaluate_one(g, balanced_cluster_design("c", c, 2, 3000 + inst), LinearOutcome{coef}, cfg);
    const double exact = exact_bias_linear(fold_graph(g), c, coef.gamma);
    const double z = std::abs(r.dim.bias.value - exact) / r.std_error;
    worst_z = std::max(worst_z, z);
    within += z < 3.0;
  }
  return {within == 20, std::to_string(within) + "/20 within 3 SE, max |z| = " + fmt(worst_z, 3)};
}

// 3. argmin of H equals argmax of the covariance trace.
Outcome minimax_covariance() {
  std::size_t agree = 0;
  for (std::uint64_t inst = 0; inst < 50; ++inst) {
    const BipartiteGraph g = test::random_graph(8, 6, 0.35, 4000 + inst);
    const FoldedGraph f = fold_graph(g);
    std::vector<double> hs, covs;
    for (unsigned mask = 0; mask < 256; ++mask) {
      if (__builtin_popcount(mask) != 4 || (mask & 1u) == 0) continue;
      std::vector<std::size_t> labels(8);
      for (std::size_t i = 0; i < 8; ++i) labels[i] = (mask >> i) & 1u;
      const Clustering c(labels, 2);
      hs.push_back(objective_h(f, c));
      covs.push_back(cov_trace_exact(f, c, 1));
    }
    const double hmin = *std::min_element(hs.begin(), hs.end());
    const double cmax = *std::max_element(covs.begin(), covs.end());
    bool same = true;
    for (std::size_t a = 0; a < hs.size(); ++a) {
      same &= (std::abs(hs[a] - hmin) < 1e-9) == (std::abs(covs[a] - cmax) < 1e-9);
    }
    agree += same;
  }
  return {agree == 50, std::to_string(agree) + "/50 graphs with identical optimal sets over 35 clusterings"};
}

// 4. Counterexample fixtures.
Outcome counterexamples() {
  const BipartiteGraph g1 = read_graph(test::fixture("c1_graph.tsv"));
  const auto j1 = parse_clustering_csv(read_text_file(test::fixture("c1_clustering1.csv")));
  const auto j2 = parse_clustering_csv(read_text_file(test::fixture("c1_clustering2.csv")));
  const double d1 = direct_cut_cost(g1, j1);
  const double d2 = direct_cut_cost(g1, j2);
  const FoldedGraph f1 = fold_graph(g1);
  const double h1 = objective_h(f1, read_clustering(test::fixture("c1_clustering1.csv"), g1.n_experimental()));
  const double h2 = objective_h(f1, read_clustering(test::fixture("c1_clustering2.csv"), g1.n_experimental()));
  const bool c1_ok = d1 == 4.0 && d2 == 4.0 && h1 < h2;

  const BipartiteGraph g2 = read_graph(test::fixture("c2_graph.tsv"));
  const FoldedGraph f2 = fold_graph(g2);
  const std::size_t n2 = g2.n_experimental();
  const Clustering a = read_clustering(test::fixture("c2_clustering1.csv"), n2);
  const Clustering b = read_clustering(test::fixture("c2_clustering2.csv"), n2);
  const bool fixture_ok = objective_trvar(g2, b) < objective_trvar(g2, a) &&
                          objective_h(f2, b) > objective_h(f2, a) && !(a == b);

  // The partitioner applied to each objective separately reaches the same split.
  const PartitionConfig cfg{2, 0.1, 20, InitMethod::greedy_line, 1};
  const Clustering by_h = balanced_partition(h_partition_graph(f2), cfg);
  const Clustering by_var = balanced_partition(trvar_partition_graph(g2), cfg);
  const bool search_ok = objective_h(f2, by_var) > objective_h(f2, by_h) &&
                         objective_trvar(g2, by_var) < objective_trvar(g2, by_h);

  return {c1_ok && fixture_ok && search_ok,
          "tie fixture direct cost " + fmt(d1) + " vs " + fmt(d2) + ", H " + fmt(h1) + " vs " + fmt(h2) +
              "; heavy-unit fixture (n = 50) H " + fmt(objective_h(f2, a)) + " vs " + fmt(objective_h(f2, b)) +
              ", dose trace objective " + fmt(objective_trvar(g2, a)) + " vs " +
              fmt(objective_trvar(g2, b)) + "; partitioner H-optimal H = " +
              fmt(objective_h(f2, by_h)) + ", variance-optimal H = " + fmt(objective_h(f2, by_var))};
}

// 5. No cross-group edges: clustered design unbiased, unit design badly biased.
Outcome zero_interference() {
  const auto lg = generate_sbm({200, 400, 10, 0.5, 0.0, 51});
  const Clustering c = h_clustering(lg.graph, 10, 5);
  const OutcomeModel model = LinearOutcome{preset_coefficients(200, 52)};
  ExperimentConfig cfg;
  cfg.draws = 2000;
  cfg.seed = 53;
  const EvalReport clustered = evaluate_one(lg.graph, balanced_cluster_design("h", c, 5, 54), model, cfg);
  const EvalReport unit = evaluate_one(lg.graph, unit_level_design(200, 54), model, cfg);
  const double se = clustered.std_error;
  const bool ok = std::abs(clustered.dim.bias.value) < 3 * se &&
                  std::abs(unit.dim.bias.value) > 10 * se;
  return {ok, "H(C) = " + fmt(clustered.objective_h) + ", clustered bias " +
                  fmt(clustered.dim.bias.value) + " (SE " + fmt(se) + "), unit-level bias " +
                  fmt(unit.dim.bias.value)};
}

// 6. Light cross-group interference: H(C) against the planted and the direct clusterings.
Outcome sparse_interference_ordering() {
  const auto lg = generate_sbm({1000, 2000, 20, 0.5, 0.005, 61});
  const Clustering by_h = h_clustering(lg.graph, 20, 6);
  const Clustering truth(lg.exp_labels, 20);
  const Clustering direct = direct_clustering(lg.graph, {20, 0.1, 20, InitMethod::greedy_line, 6});
  const LinearCoefficients coef = preset_coefficients(1000, 62);
  const OutcomeModel model = LinearOutcome{coef};
  ExperimentConfig cfg;
  cfg.draws = 8000;
  cfg.seed = 63;
  const std::vector<DesignSpec> designs{balanced_cluster_design("h", by_h, 10, 64),
                                        balanced_cluster_design("truth", truth, 10, 64),
                                        balanced_cluster_design("direct", direct, 10, 64)};
  const auto reps = run_experiment(lg.graph, designs, model, cfg);
  const double bh = std::abs(reps[0].dim.bias.value);
  const double bt = std::abs(reps[1].dim.bias.value);
  const double bd = std::abs(reps[2].dim.bias.value);
  const bool vs_truth = bh <= 1.1 * bt || overlap(reps[0].dim.bias, reps[1].dim.bias);
  const bool vs_direct = bh < bd && !overlap(reps[0].dim.bias, reps[2].dim.bias);
  const FoldedGraph f = fold_graph(lg.graph);
  std::string exact;
  for (const auto* c : {&by_h, &truth, &direct}) {
    exact += (exact.empty() ? "" : " / ") +
             (c->equal_sized() ? fmt(exact_bias_linear(f, *c, coef.gamma)) : std::string("n/a"));
  }
  return {vs_truth && vs_direct,
          "bias H(C) " + interval_text(reps[0].dim.bias) + ", truth " +
              interval_text(reps[1].dim.bias) + ", direct " + interval_text(reps[2].dim.bias) +
              "; H = " + fmt(reps[0].objective_h) + " / " + fmt(reps[1].objective_h) + " / " +
              fmt(reps[2].objective_h) + "; exact bias " + exact};
}

// 7. Neighborhood outcome model.
Outcome delta_trend() {
  const auto lg = generate_sbm({1000, 2000, 20, 0.5, 0.005, 71});
  const Clustering c = h_clustering(lg.graph, 20, 7, 1);
  ExperimentConfig cfg;
  cfg.draws = 500;
  cfg.seed = 72;
  const EvalReport wide =
      evaluate_one(lg.graph, balanced_cluster_design("h", c, 10, 73), DeltaOutcome{{0.5}}, cfg);
  const EvalReport narrow =
      evaluate_one(lg.graph, unit_level_design(1000, 73), DeltaOutcome{{0.1}}, cfg);
  const double rw = wide.dim.relative_bias.value;
  const double rn = narrow.dim.relative_bias.value;
  return {rw < 0.05 && std::abs(rn - 1.0) <= 0.05,
          "N = 1000: H(C) relative bias at delta 0.5 = " + fmt(rw) +
              ", unit-level relative bias at delta 0.1 = " + fmt(rn)};
}

// 8. Lipschitz and neighborhood bounds.
Outcome bounds() {
  std::size_t checks = 0;
  std::size_t held = 0;
  double worst_gap = 0.0;
  for (std::uint64_t inst = 0; inst < 50; ++inst) {
    const std::size_t k = 2 + inst % 3;
    const std::size_t n = k * (12 / k);
    const BipartiteGraph g = test::random_graph(n, 10, 0.25, 8000 + inst);
    const Clustering c = test::random_equal_clustering(n, k, inst);
    const LinearCoefficients coef = preset_coefficients(n, inst);
    const std::size_t k_t = 1 + inst % (k - 1);
    for (LipschitzShape shape : kAllShapes) {
      const BoundCheck b =
          lemma_bound_check(g, c, k_t, LipschitzOutcome{{coef.alpha, coef.beta, 1.3, shape}});
      ++checks;
      held += b.holds;
      if (shape == LipschitzShape::identity) {
        worst_gap = std::max(worst_gap, std::abs(b.bound - b.measured));
      }
    }
    for (double delta : {0.1, 0.3, 0.5}) {
      ++checks;
      held += lemma_bound_check(g, c, k_t, DeltaOutcome{{delta}}).holds;
    }
  }
  return {held == checks && worst_gap <= 1e-10,
          std::to_string(held) + "/" + std::to_string(checks) +
              " bound checks hold; identity shape max |bound - bias| = " + fmt(worst_gap, 3)};
}

// 9. IPS on a sparse graph, propensities on a dense one, two-hop closed form.
Outcome ips_behavior() {
  const BipartiteGraph sparse = test::random_graph(24, 24, 0.06, 91);
  ExperimentConfig cfg;
  cfg.draws = 20000;
  cfg.seed = 92;
  cfg.ips_delta = 0.5;
  cfg.propensity_draws = 200000;
  const EvalReport r =
      evaluate_one(sparse, unit_bernoulli_design(0.5, 93), DeltaOutcome{{0.5}}, cfg);
  const double ips_se = r.ips.std.value / std::sqrt(static_cast<double>(cfg.draws));
  const bool ips_ok = std::abs(r.ips.bias.value) < 3 * ips_se && r.ips_skipped == 0;

  const auto dense = generate_sbm({1000, 2000, 20, 0.5, 0.005, 94});
  const PropensityTable t = estimate_propensities(
      balanced_cluster_design("truth", Clustering(dense.exp_labels, 20), 10, 95), dense.graph, 0.1, 2000);
  const double max_prop = std::max(*std::max_element(t.treated.begin(), t.treated.end()),
                                   *std::max_element(t.control.begin(), t.control.end()));
  const double iso = sbm_two_hop_isolation_prob(0.005, 0.5, 2000, 1000, 20);
  const bool iso_ok = iso >= 1e-12 && iso <= 1e-10;
  return {ips_ok && max_prop < 1e-3 && iso_ok,
          "sparse IPS bias " + fmt(r.ips.bias.value) + " (SE " + fmt(ips_se) + ", DIM bias " +
              fmt(r.dim.bias.value) + "); dense max propensity " + fmt(max_prop) +
              "; isolation probability " + fmt(iso, 3)};
}

// 10. Marketplace at half scale.
Outcome marketplace_ordering() {
  MarketplaceSpec spec;
  spec.n_customers = 250;
  spec.n_listings = 500;
  spec.alpha_lift = 2.0;
  spec.seed = 101;
  const BipartiteGraph g = build_history_graph(spec);
  const Clustering c = h_clustering(g, 20, 102);
  ExperimentConfig cfg;
  cfg.draws = 500;
  cfg.seed = 103;
  cfg.tau_replications = 500;
  const std::vector<DesignSpec> designs{balanced_cluster_design("h", c, 10, 104),
                                        unit_level_design(250, 104)};
  const auto reps = run_experiment(g, designs, MarketplaceOutcome{spec}, cfg);
  const double bh = std::abs(reps[0].dim.bias.value);
  const double bu = std::abs(reps[1].dim.bias.value);
  const double sh = reps[0].dim.std.value;
  const double su = reps[1].dim.std.value;
  const double ratio = std::max(sh, su) / std::min(sh, su);
  return {bh < bu && !overlap(reps[0].dim.bias, reps[1].dim.bias) && ratio <= 1.5,
          "tau " + fmt(reps[0].dim.tau.value) + ", bias H(C) " + interval_text(reps[0].dim.bias) +
              ", unit-level " + interval_text(reps[1].dim.bias) + ", std " + fmt(sh) + " vs " +
              fmt(su) + " (ratio " + fmt(ratio, 3) + "), history edges " +
              std::to_string(g.edges().size())};
}

// 11. Every CLI command is byte-for-byte reproducible.
Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "bicr_acceptance_cli";
  fs::remove_all(root);
  const std::string cli = BICR_CLI_PATH;
  std::vector<std::string> mismatched;
  std::size_t compared = 0;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = root / std::to_string(run);
    fs::create_directories(dir);
    const std::string d = dir.string() + "/";
    const std::vector<std::string> cmds{
        "gen sbm --n-exp 60 --n-int 120 --groups 4 --p-in 0.4 --p-out 0.02 --seed 3 -o " + d +
            "sbm.tsv --labels " + d + "sbm_labels.csv",
        "gen powerlaw --n-exp 40 --seed 4 -o " + d + "pl.json --labels " + d + "pl_labels.csv",
        "gen market --seed 5 -o " + d + "market.tsv --labels " + d + "market_labels.csv --write-config " + d +
            "market.cfg",
        "gen coeffs --n 60 --seed 6 -o " + d + "coeffs.csv",
        "fold --graph " + d + "sbm.tsv -o " + d + "folded.tsv",
        "partition --graph " + d + "folded.tsv --k 4 --starts 3 --seed 7 -o " + d + "h.csv",
        "partition --graph " + d + "sbm.tsv --objective direct --k 4 --seed 7 -o " + d + "direct.csv",
        "partition --graph " + d + "sbm.tsv --objective trvar --k 4 --init random --seed 7 -o " + d +
            "trvar.csv",
        "objective --graph " + d + "sbm.tsv --clustering " + d + "h.csv --objective h -o " + d + "h_value.txt",
        "design --clustering " + d + "h.csv --kind balanced --seed 8 --draw 2 -o " + d + "z.csv",
        "evaluate --graph " + d + "sbm.tsv --clustering " + d + "h.csv --design balanced --design unit "
            "--design bernoulli:0.5 "
            "--model linear --coeffs " + d + "coeffs.csv --draws 50 --seed 9 --ips-delta 0.5 "
            "--propensity-draws 100 -o " + d + "results.csv",
        "evaluate --graph " + d + "sbm.tsv --clustering " + d + "h.csv --model delta --delta 0.3 "
            "--draws 30 --seed 9 -o " + d + "results.csv",
        "report " + d + "results.csv -o " + d + "report.txt",
    };
    for (const std::string& c : cmds) {
      const std::string full = "\"" + cli + "\" " + c + " > " + d + "stdout.log 2>&1";
      if (std::system(full.c_str()) != 0) {
        return {false, "command failed: bicr " + c + "\n" + read_text_file(d + "stdout.log")};
      }
    }
  }
  for (const auto& entry : fs::directory_iterator(root / "0")) {
    const std::string name = entry.path().filename().string();
    if (name == "stdout.log") continue;
    ++compared;
    if (read_text_file(entry.path().string()) != read_text_file((root / "1" / name).string())) {
      mismatched.push_back(name);
    }
  }
  fs::remove_all(root);
  std::string detail = std::to_string(compared - mismatched.size()) + "/" +
                       std::to_string(compared) + " output files byte-identical across reruns";
  for (const auto& m : mismatched) detail += "; differs: " + m;
  return {mismatched.empty() && compared >= 15, detail};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "closed-form bias", 60, closed_form_bias},
      {2, "Monte-Carlo consistency", 120, monte_carlo_consistency},
      {3, "minimax/covariance equivalence", 60, minimax_covariance},
      {4, "counterexample separation", 60, counterexamples},
      {5, "zero-interference regime", 300, zero_interference},
      {6, "ordering at p_out = 0.005", 600, sparse_interference_ordering},
      {7, "neighborhood-model trend", 300, delta_trend},
      {8, "Lipschitz and neighborhood bounds", 300, bounds},
      {9, "IPS behavior", 300, ips_behavior},
      {10, "marketplace ordering", 900, marketplace_ordering},
      {11, "CLI determinism", 300, cli_determinism},
  };
  std::vector<int> only;
  for (int a = 1; a < argc; ++a) only.push_back(std::atoi(argv[a]));

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = out.pass && in_time;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): "
              << out.detail << " [" << fmt(secs, 3) << " s" << (in_time ? "" : ", over the limit")
              << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "bicr/design.hpp"
#include "bicr/errors.hpp"
#include "bicr/gen.hpp"
#include "bicr/graph.hpp"
#include "bicr/harness.hpp"
#include "bicr/io.hpp"
#include "bicr/objective.hpp"
#include "bicr/outcome.hpp"
#include "bicr/partition.hpp"

namespace bicr::cli {

namespace {

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

// --- gen --------------------------------------------------------------------

struct SbmOptions {
  SbmSpec spec{200, 400, 10, 0.5, 0.0, 0};
  std::string out;
  std::string labels;
};

struct PowerLawOptions {
  PowerLawSpec spec;
  std::string out;
  std::string labels;
};

struct MarketOptions {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string labels;
  std::string write_config;
};

struct CoeffOptions {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

MarketplaceSpec load_market(const std::string& path) {
  return path.empty() ? MarketplaceSpec{} : parse_marketplace_spec(read_text_file(path));
}

void register_gen(CLI::App& app) {
  CLI::App* gen = app.add_subcommand("gen", "Generate graphs, marketplace histories and coefficients");
  gen->require_subcommand(1);

  auto sbm = std::make_shared<SbmOptions>();
  CLI::App* s = gen->add_subcommand("sbm", "Bipartite stochastic block model");
  s->add_option("--n-exp", sbm->spec.n_experimental, "Experimental units")->capture_default_str();
  s->add_option("--n-int", sbm->spec.n_interference, "Interference units")->capture_default_str();
  s->add_option("--groups", sbm->spec.n_groups, "Groups on each side")->capture_default_str();
  s->add_option("--p-in", sbm->spec.p_in, "Within-group edge probability")->capture_default_str();
  s->add_option("--p-out", sbm->spec.p_out, "Cross-group edge probability")->capture_default_str();
  s->add_option("--seed", sbm->spec.seed, "Seed")->capture_default_str();
  s->add_option("-o,--output", sbm->out, "Graph file (.tsv or .json)")->required();
  s->add_option("--labels", sbm->labels, "Ground-truth labels CSV");
  s->callback([sbm] {
    const LabeledGraph lg = generate_sbm(sbm->spec);
    write_graph(sbm->out, lg.graph);
    if (!sbm->labels.empty()) {
      write_text_file(sbm->labels, format_labels_csv(lg.exp_labels, lg.int_labels));
    }
  });

  auto pl = std::make_shared<PowerLawOptions>();
  CLI::App* p = gen->add_subcommand("powerlaw", "Preferential-attachment graph with latent classes");
  p->add_option("--n-exp", pl->spec.n_experimental, "Experimental units")->capture_default_str();
  p->add_option("--classes", pl->spec.n_classes, "Latent classes")->capture_default_str();
  p->add_option("--lambda", pl->spec.lambda, "New interference unit probability")
      ->capture_default_str();
  p->add_option("--p", pl->spec.p, "Same-class affinity")->capture_default_str();
  p->add_option("--q", pl->spec.q, "Cross-class affinity")->capture_default_str();
  p->add_option("--zipf", pl->spec.zipf_exponent, "Zipf exponent of X in degree 2X")
      ->capture_default_str();
  p->add_option("--seed", pl->spec.seed, "Seed")->capture_default_str();
  p->add_option("-o,--output", pl->out, "Graph file (.tsv or .json)")->required();
  p->add_option("--labels", pl->labels, "Ground-truth labels CSV");
  p->callback([pl] {
    const LabeledGraph lg = generate_powerlaw(pl->spec);
    write_graph(pl->out, lg.graph);
    if (!pl->labels.empty()) {
      write_text_file(pl->labels, format_labels_csv(lg.exp_labels, lg.int_labels));
    }
  });

  auto mk = std::make_shared<MarketOptions>();
  CLI::App* m = gen->add_subcommand("market", "Booking-history graph of the marketplace simulator");
  m->add_option("--config", mk->config, "Marketplace key=value file (defaults otherwise)");
  m->add_option("--seed", mk->seed, "Override the config seed")->each([mk](const std::string&) {
    mk->seed_set = true;
  });
  m->add_option("-o,--output", mk->out, "Graph file (.tsv or .json)");
  m->add_option("--labels", mk->labels, "Customer and listing types CSV");
  m->add_option("--write-config", mk->write_config, "Write the effective config");
  m->callback([mk] {
    MarketplaceSpec spec = load_market(mk->config);
    if (mk->seed_set) spec.seed = mk->seed;
    if (!mk->write_config.empty()) write_text_file(mk->write_config, format_marketplace_spec(spec));
    if (!mk->out.empty()) write_graph(mk->out, build_history_graph(spec));
    if (!mk->labels.empty()) {
      const MarketTypes t = market_types(spec);
      write_text_file(mk->labels, format_labels_csv(t.customer, t.listing));
    }
    if (mk->out.empty() && mk->write_config.empty() && mk->labels.empty()) {
      throw ArgumentError("gen market needs at least one of --output, --labels, --write-config");
    }
  });

  auto co = std::make_shared<CoeffOptions>();
  CLI::App* c = gen->add_subcommand("coeffs", "Linear-model coefficients from the preset");
  c->add_option("--n", co->n, "Experimental units")->required();
  c->add_option("--seed", co->seed, "Seed")->capture_default_str();
  c->add_option("-o,--output", co->out, "Coefficients CSV")->required();
  c->callback([co] {
    write_text_file(co->out, format_coefficients_csv(preset_coefficients(co->n, co->seed)));
  });
}

// --- fold / objective -------------------------------------------------------

struct FoldOptions {
  std::string graph;
  std::string mode = "nn";
  std::string out;
};

struct ObjectiveOptions {
  std::string graph;
  std::string clustering;
  std::string objective = "h";
  std::string mode = "nn";
  std::string out;
};

void register_fold(CLI::App& app) {
  auto o = std::make_shared<FoldOptions>();
  CLI::App* f = app.add_subcommand("fold", "Fold a bipartite graph onto the experimental units");
  f->add_option("--graph", o->graph, "Bipartite graph file")->required();
  f->add_option("--mode", o->mode, "Normalization: nn, nu, un or uu (dose first)")
      ->capture_default_str();
  f->add_option("-o,--output", o->out, "Folded TSV (stdout if omitted)");
  f->callback([o] {
    const BipartiteGraph g = read_graph(o->graph);
    emit(o->out, format_folded_tsv(fold_graph(g, NormalizationMode::parse(o->mode))));
  });
}

void register_objective(CLI::App& app) {
  auto o = std::make_shared<ObjectiveOptions>();
  CLI::App* c = app.add_subcommand("objective", "Evaluate a clustering objective");
  c->add_option("--graph", o->graph, "Bipartite graph file")->required();
  c->add_option("--clustering", o->clustering, "Clustering CSV")->required();
  c->add_option("--objective", o->objective, "h, trvar or direct")
      ->check(CLI::IsMember({"h", "trvar", "direct"}))
      ->capture_default_str();
  c->add_option("--mode", o->mode, "Fold normalization for h")->capture_default_str();
  c->add_option("-o,--output", o->out, "Write the value here instead of stdout");
  c->callback([o] {
    const BipartiteGraph g = read_graph(o->graph);
    const std::size_t n = g.n_experimental();
    double value = 0.0;
    if (o->objective == "direct") {
      const auto labels = parse_clustering_csv(read_text_file(o->clustering));
      if (labels.size() == n + g.n_interference()) {
        value = direct_cut_cost(g, labels);
      } else {
        value = direct_cut_cost(g, complete_joint_labels(g, read_clustering(o->clustering, n)));
      }
    } else {
      const Clustering c = read_clustering(o->clustering, n);
      value = o->objective == "h"
                  ? objective_h(fold_graph(g, NormalizationMode::parse(o->mode)), c)
                  : objective_trvar(g, c);
    }
    emit(o->out, format_double(value) + "\n");
  });
}

// --- partition --------------------------------------------------------------

struct PartitionOptions {
  std::string graph;
  std::string objective = "h";
  std::string mode = "nn";
  PartitionConfig cfg{20, 0.1, 20, InitMethod::greedy_line, 0};
  std::string init = "greedy_line";
  std::size_t starts = 1;
  std::string out;
};

void register_partition(CLI::App& app) {
  auto o = std::make_shared<PartitionOptions>();
  CLI::App* p = app.add_subcommand("partition", "Balanced partition minimizing a cut objective");
  p->add_option("--graph", o->graph, "Folded TSV, or a bipartite graph with --objective")
      ->required();
  p->add_option("--objective", o->objective, "For bipartite input: h, trvar or direct")
      ->check(CLI::IsMember({"h", "trvar", "direct"}))
      ->capture_default_str();
  p->add_option("--mode", o->mode, "Fold normalization when folding a bipartite graph")
      ->capture_default_str();
  p->add_option("--k", o->cfg.k, "Cluster count")->capture_default_str();
  p->add_option("--tolerance", o->cfg.tolerance, "Allowed size imbalance")->capture_default_str();
  p->add_option("--passes", o->cfg.max_passes, "Maximum swap passes")->capture_default_str();
  p->add_option("--init", o->init, "greedy_line or random")->capture_default_str();
  p->add_option("--starts", o->starts, "Independent starts; the lowest cut wins")
      ->capture_default_str();
  p->add_option("--seed", o->cfg.seed, "Seed")->capture_default_str();
  p->add_option("-o,--output", o->out, "Clustering CSV")->required();
  p->callback([o] {
    PartitionConfig cfg = o->cfg;
    cfg.init = parse_init_method(o->init);
    const std::string text = read_text_file(o->graph);
    WeightedGraph wg;
    std::size_t n = 0;
    if (looks_like_folded_tsv(text)) {
      const FoldedGraph f = parse_folded_tsv(text);
      wg = h_partition_graph(f);
      n = f.n();
    } else {
      const BipartiteGraph g =
          o->graph.size() >= 5 && o->graph.substr(o->graph.size() - 5) == ".json"
              ? parse_graph_json(text)
              : parse_graph_tsv(text);
      n = g.n_experimental();
      if (o->objective == "h") {
        wg = h_partition_graph(fold_graph(g, NormalizationMode::parse(o->mode)));
      } else if (o->objective == "trvar") {
        wg = trvar_partition_graph(g);
      } else {
        wg = direct_partition_graph(g);
      }
    }
    PartitionResult r = best_of(wg, cfg, o->starts);
    r.labels.resize(n);
    const Clustering c(std::move(r.labels), cfg.k, cfg.tolerance);
    write_text_file(o->out, format_clustering_csv(c.labels()));
    std::cout << "cut " << format_double(r.cut) << " passes " << r.passes << '\n';
  });
}

// --- design -----------------------------------------------------------------

struct DesignOptions {
  std::string clustering;
  std::size_t n = 0;
  std::string kind = "balanced";
  std::size_t k_treated = 0;
  double p = 0.5;
  std::uint64_t seed = 0;
  std::uint64_t draw = 0;
  std::string out;
};

void register_design(CLI::App& app) {
  auto o = std::make_shared<DesignOptions>();
  CLI::App* d = app.add_subcommand("design", "Sample one treatment assignment");
  d->add_option("--clustering", o->clustering, "Clustering CSV (cluster designs)");
  d->add_option("--n", o->n, "Unit count (unit designs)");
  d->add_option("--kind", o->kind, "balanced, cluster-bernoulli, unit or bernoulli")
      ->check(CLI::IsMember({"balanced", "cluster-bernoulli", "unit", "bernoulli"}))
      ->capture_default_str();
  d->add_option("--k-treated", o->k_treated, "Treated clusters (default k / 2)");
  d->add_option("--p", o->p, "Treatment probability (Bernoulli designs)")->capture_default_str();
  d->add_option("--seed", o->seed, "Seed")->capture_default_str();
  d->add_option("--draw", o->draw, "Draw index")->capture_default_str();
  d->add_option("-o,--output", o->out, "Assignment CSV (stdout if omitted)");
  d->callback([o] {
    DesignSpec spec;
    std::size_t n = o->n;
    if (o->kind == "balanced" || o->kind == "cluster-bernoulli") {
      if (o->clustering.empty()) throw ArgumentError("--clustering is required for " + o->kind);
      Clustering c = Clustering::from_labels(parse_clustering_csv(read_text_file(o->clustering)));
      n = c.size();
      if (o->kind == "balanced") {
        const std::size_t k_t = o->k_treated == 0 ? c.k() / 2 : o->k_treated;
        spec = balanced_cluster_design("balanced", std::move(c), k_t, o->seed);
      } else {
        spec = cluster_bernoulli_design("cluster-bernoulli", std::move(c), o->p, o->seed);
      }
    } else {
      if (n == 0) throw ArgumentError("--n is required for " + o->kind);
      spec = o->kind == "unit" ? unit_level_design(n, o->seed) : unit_bernoulli_design(o->p, o->seed);
    }
    emit(o->out, format_assignment_csv(sample_assignment(spec, o->draw, n)));
  });
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateOptions {
  std::string graph;
  std::vector<std::string> clusterings;
  std::vector<std::string> designs;
  std::size_t k_treated = 0;
  std::string model = "linear";
  std::string coeffs;
  std::uint64_t coeff_seed = 0;
  bool coeff_seed_set = false;
  double lipschitz = 1.0;
  std::string shape = "identity";
  double delta = 0.5;
  std::string market;
  ExperimentConfig cfg;
  std::string mode = "nn";
  std::string out;
};

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

// "unit", "bernoulli[:p]", "balanced", "cluster-bernoulli[:p]"; the last two
// pair with the clusterings given on the command line.
std::vector<DesignSpec> build_designs(const EvaluateOptions& o, std::size_t n) {
  std::vector<DesignSpec> out;
  std::vector<std::string> kinds = o.designs;
  if (kinds.empty() && !o.clusterings.empty()) kinds.push_back("balanced");
  if (kinds.empty()) throw ArgumentError("evaluate needs --clustering and/or --design");
  const bool uses_clusterings = std::any_of(kinds.begin(), kinds.end(), [](const std::string& d) {
    return d.rfind("balanced", 0) == 0 || d.rfind("cluster-bernoulli", 0) == 0;
  });
  if (!o.clusterings.empty() && !uses_clusterings) {
    throw ArgumentError("--clustering given but no balanced or cluster-bernoulli --design uses it");
  }
  for (const std::string& d : kinds) {
    const auto colon = d.find(':');
    const std::string kind = d.substr(0, colon);
    const double p = colon == std::string::npos ? 0.5 : parse_double(d.substr(colon + 1));
    if (kind == "unit") {
      out.push_back(unit_level_design(n, o.cfg.seed));
    } else if (kind == "bernoulli") {
      out.push_back(unit_bernoulli_design(p, o.cfg.seed));
    } else if (kind == "balanced" || kind == "cluster-bernoulli") {
      if (o.clusterings.empty()) throw ArgumentError("design '" + kind + "' needs --clustering");
      for (const std::string& path : o.clusterings) {
        Clustering c = read_clustering(path, n);
        if (kind == "balanced") {
          const std::size_t k_t = o.k_treated == 0 ? c.k() / 2 : o.k_treated;
          out.push_back(balanced_cluster_design(stem(path), std::move(c), k_t, o.cfg.seed));
        } else {
          out.push_back(
              cluster_bernoulli_design(stem(path) + "-bernoulli", std::move(c), p, o.cfg.seed));
        }
      }
    } else {
      throw ArgumentError("unknown design '" + d + "'");
    }
  }
  return out;
}

OutcomeModel build_model(const EvaluateOptions& o, std::size_t n) {
  const std::uint64_t coeff_seed = o.coeff_seed_set ? o.coeff_seed : o.cfg.seed;
  if (o.model == "linear") {
    LinearCoefficients c = o.coeffs.empty() ? preset_coefficients(n, coeff_seed)
                                            : parse_coefficients_csv(read_text_file(o.coeffs));
    if (c.size() != n) throw ArgumentError("coefficients do not match the graph");
    return LinearOutcome{std::move(c)};
  }
  if (o.model == "lipschitz") {
    LinearCoefficients c = o.coeffs.empty() ? preset_coefficients(n, coeff_seed)
                                            : parse_coefficients_csv(read_text_file(o.coeffs));
    if (c.size() != n) throw ArgumentError("coefficients do not match the graph");
    return LipschitzOutcome{
        LipschitzModel{std::move(c.alpha), std::move(c.beta), o.lipschitz, parse_shape(o.shape)}};
  }
  if (o.model == "delta") return DeltaOutcome{DeltaModel{o.delta}};
  return MarketplaceOutcome{load_market(o.market)};
}

void register_evaluate(CLI::App& app) {
  auto o = std::make_shared<EvaluateOptions>();
  CLI::App* e = app.add_subcommand("evaluate", "Monte-Carlo bias, std and RMSE of the estimators");
  e->add_option("--graph", o->graph, "Bipartite graph file")->required();
  e->add_option("--clustering", o->clusterings, "Clustering CSV (repeatable)");
  e->add_option("--design", o->designs,
                "balanced, cluster-bernoulli[:p], unit or bernoulli[:p] (repeatable)");
  e->add_option("--k-treated", o->k_treated, "Treated clusters (default k / 2)");
  e->add_option("--model", o->model, "linear, lipschitz, delta or marketplace")
      ->check(CLI::IsMember({"linear", "lipschitz", "delta", "marketplace"}))
      ->capture_default_str();
  e->add_option("--coeffs", o->coeffs, "Coefficients CSV (preset draw if omitted)");
  e->add_option("--coeff-seed", o->coeff_seed, "Seed of the preset coefficients (default --seed)")
      ->each([o](const std::string&) { o->coeff_seed_set = true; });
  e->add_option("--lipschitz", o->lipschitz, "Lipschitz constant")->capture_default_str();
  e->add_option("--shape", o->shape, "identity, abs, clamp or sin")->capture_default_str();
  e->add_option("--delta", o->delta, "Delta of the neighborhood model")->capture_default_str();
  e->add_option("--market", o->market, "Marketplace key=value file");
  e->add_option("--draws", o->cfg.draws, "Assignments per design")->capture_default_str();
  e->add_option("--seed", o->cfg.seed, "Master seed")->capture_default_str();
  e->add_option("--bootstrap", o->cfg.bootstrap_resamples, "Bootstrap resamples")
      ->capture_default_str();
  e->add_option("--ips-delta", o->cfg.ips_delta, "Full-exposure threshold (0 disables IPS)")
      ->capture_default_str();
  e->add_option("--propensity-draws", o->cfg.propensity_draws, "Draws for IPS propensities")
      ->capture_default_str();
  e->add_option("--tau-replications", o->cfg.tau_replications,
                "Replications of the simulated marketplace effect")
      ->capture_default_str();
  e->add_option("--mode", o->mode, "Exposure normalization")->capture_default_str();
  e->add_option("-o,--output", o->out, "Results CSV (appended)")->required();
  e->callback([o] {
    EvaluateOptions opts = *o;
    opts.cfg.mode = NormalizationMode::parse(opts.mode);
    const BipartiteGraph g = read_graph(opts.graph);
    const auto designs = build_designs(opts, g.n_experimental());
    const OutcomeModel model = build_model(opts, g.n_experimental());
    const auto reports = run_experiment(g, designs, model, opts.cfg);
    append_results(opts.out, reports);
    std::cout << render_report(results_header() + format_results(reports));
  });
}

// --- report -----------------------------------------------------------------

struct ReportOptions {
  std::string results;
  std::string out;
};

void register_report(CLI::App& app) {
  auto o = std::make_shared<ReportOptions>();
  CLI::App* r = app.add_subcommand("report", "Tabulate a results CSV");
  r->add_option("results", o->results, "Results CSV")->required();
  r->add_option("-o,--output", o->out, "Write the table here instead of stdout");
  r->callback([o] { emit(o->out, render_report(read_text_file(o->results))); });
}

}  // namespace

void register_commands(CLI::App& app) {
  register_gen(app);
  register_fold(app);
  register_objective(app);
  register_partition(app);
  register_design(app);
  register_evaluate(app);
  register_report(app);
}

}  // namespace bicr::cli

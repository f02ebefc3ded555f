#include "bicr/reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bicr/errors.hpp"

namespace bicr::reference {

FoldedGraph fold_graph(const BipartiteGraph& g, NormalizationMode mode) {
  const std::size_t n = g.n_experimental();
  std::vector<double> dense(n * n, 0.0);
  std::vector<char> present(n * n, 0);
  for (std::size_t s = 0; s < g.n_interference(); ++s) {
    const double t_s = g.col_sum(s);
    if (t_s == 0.0) continue;
    for (const Neighbor& is : g.int_neighbors(s)) {
      const double s_i = g.row_sum(is.index);
      if (s_i == 0.0) continue;
      const double a = mode.exposure_normalized ? is.weight / s_i : is.weight;
      for (const Neighbor& js : g.int_neighbors(s)) {
        const double b = mode.dose_normalized ? js.weight / t_s : js.weight;
        dense[is.index * n + js.index] += a * b;
        present[is.index * n + js.index] = 1;
      }
    }
  }
  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<Neighbor> entries;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (present[i * n + j]) entries.push_back({j, dense[i * n + j]});
    }
    offsets[i + 1] = entries.size();
  }
  return FoldedGraph(n, std::move(offsets), std::move(entries), mode);
}

PropensityTable estimate_propensities(const DesignSpec& spec, const BipartiteGraph& g,
                                      double delta_exposure, std::size_t draws,
                                      NormalizationMode mode) {
  if (draws == 0) throw ArgumentError("propensity estimation needs at least one draw");
  if (!(delta_exposure > 0.0)) throw ArgumentError("exposure threshold must be positive");
  const std::size_t n = g.n_experimental();
  std::vector<std::size_t> count_t(n, 0);
  std::vector<std::size_t> count_c(n, 0);
  for (std::size_t d = 0; d < draws; ++d) {
    const Assignment a = sample_assignment(spec, d, n);
    const ExposureProfile p = compute_profile(g, a, mode);
    for (std::size_t i = 0; i < n; ++i) {
      if (fully_treated(a.z[i], p.exposures[i], delta_exposure)) ++count_t[i];
      if (fully_controlled(a.z[i], p.exposures[i], delta_exposure)) ++count_c[i];
    }
  }
  PropensityTable table;
  table.draws = draws;
  table.delta_exposure = delta_exposure;
  table.design = spec.name;
  for (std::size_t i = 0; i < n; ++i) {
    table.treated.push_back(static_cast<double>(count_t[i]) / static_cast<double>(draws));
    table.control.push_back(static_cast<double>(count_c[i]) / static_cast<double>(draws));
  }
  return table;
}

BootstrapIntervals bootstrap_metrics(std::span<const double> estimates, double tau,
                                     std::span<const double> tau_replicates,
                                     std::size_t resamples, std::uint64_t seed) {
  const PointMetrics point = point_metrics(estimates, tau, tau_replicates);
  std::vector<double> mean, taus, bias, rel, sd, rmse;
  std::vector<double> est(estimates.size());
  std::vector<double> reps(tau_replicates.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    Rng rng = make_rng(seed, b, Stream::bootstrap);
    for (double& v : est) v = estimates[uniform_below(rng, estimates.size())];
    for (double& v : reps) v = tau_replicates[uniform_below(rng, tau_replicates.size())];
    const PointMetrics m = point_metrics(est, tau, reps);
    mean.push_back(m.mean);
    taus.push_back(m.tau);
    bias.push_back(m.bias);
    rel.push_back(m.relative_bias);
    sd.push_back(m.std);
    rmse.push_back(m.rmse);
  }
  auto interval = [](double value, std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    return Interval{value, quantile_sorted(v, 0.025), quantile_sorted(v, 0.975)};
  };
  return {interval(point.mean, mean), interval(point.tau, taus),
          interval(point.bias, bias), interval(point.relative_bias, rel),
          interval(point.std, sd),    interval(point.rmse, rmse)};
}

std::vector<EvalReport> run_experiment(const BipartiteGraph& g, std::span<const DesignSpec> designs,
                                       const OutcomeModel& model, const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.n_experimental();
  const auto* market = std::get_if<MarketplaceOutcome>(&model);
  MarketTypes types;
  std::vector<double> tau_reps;
  double tau = 0.0;
  if (market != nullptr) {
    types = market_types(market->spec);
    tau_reps = marketplace_tate(market->spec, cfg.tau_replications, cfg.seed).replicates;
  } else {
    tau = true_tate(model, n);
  }
  const FoldedGraph folded = reference::fold_graph(g, cfg.mode);

  std::vector<EvalReport> reports;
  for (std::size_t di = 0; di < designs.size(); ++di) {
    const DesignSpec& design = designs[di];
    const Clustering clustering = design.clustering(n);
    EvalReport rep;
    rep.design = design.name;
    rep.model = model_name(model);
    rep.objective_h = objective_h(folded, clustering);
    rep.objective_trvar = objective_trvar(g, clustering);
    rep.draws = cfg.draws;
    rep.seed = cfg.seed;
    rep.tau_replicates = tau_reps;
    rep.has_ips = cfg.ips_delta > 0.0;

    PropensityTable table;
    if (rep.has_ips) {
      DesignSpec prop = design;
      prop.seed = derive_seed(design.seed, 0, Stream::propensity);
      table = reference::estimate_propensities(prop, g, cfg.ips_delta, cfg.propensity_draws,
                                               cfg.mode);
    }

    std::vector<double> ips;
    for (std::size_t d = 0; d < cfg.draws; ++d) {
      const Assignment a = sample_assignment(design, d, n);
      const ExposureProfile p = compute_profile(g, a, cfg.mode);
      Rng rng = make_rng(cfg.seed, d, Stream::outcome);
      std::vector<double> y;
      if (market != nullptr) {
        y.assign(n, 0.0);
        for (std::size_t round = 0; round < market->spec.outcome_rounds; ++round) {
          const MarketRound mr = marketplace_round(market->spec, types, a.z, rng);
          for (std::size_t i = 0; i < n; ++i) y[i] += mr.y[i];
          rep.clamped += mr.clamped;
        }
        if (market->spec.outcome_rounds > 1) {
          for (double& v : y) v /= static_cast<double>(market->spec.outcome_rounds);
        }
      } else {
        y = simulate_outcomes(model, nullptr, a, p.exposures, rng);
      }
      rep.estimates.push_back(dim_estimate(y, a));
      if (rep.has_ips) {
        const IpsResult r = ips_estimate(y, a, p.exposures, table);
        ips.push_back(r.estimate);
        rep.ips_skipped += r.skipped;
      }
    }

    const std::uint64_t boot_seed = derive_seed(cfg.seed, di, Stream::bootstrap);
    rep.dim = reference::bootstrap_metrics(rep.estimates, tau, tau_reps, cfg.bootstrap_resamples,
                                           boot_seed);
    double sum = 0.0;
    for (double v : rep.estimates) sum += v;
    const double nd = static_cast<double>(cfg.draws);
    const double mean = sum / nd;
    double ss = 0.0;
    for (double v : rep.estimates) ss += (v - mean) * (v - mean);
    rep.std_error = std::sqrt(ss / (nd - 1.0) / nd);
    if (rep.has_ips) {
      rep.ips = reference::bootstrap_metrics(ips, tau, tau_reps, cfg.bootstrap_resamples, boot_seed);
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace bicr::reference

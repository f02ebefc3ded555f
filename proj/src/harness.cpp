#include "bicr/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "bicr/errors.hpp"
#include "bicr/estimate.hpp"
#include "bicr/io.hpp"
#include "parallel_errors.hpp"

namespace bicr {

double exact_bias_linear(const FoldedGraph& folded, const Clustering& c,
                         std::span<const double> gamma) {
  if (!folded.mode().fully_normalized()) {
    throw ArgumentError("exact linear bias needs the fully normalized fold, got mode " +
                        folded.mode().code());
  }
  if (folded.n() != c.size() || gamma.size() != c.size()) {
    throw ArgumentError("folded graph, clustering and gamma must have the same length");
  }
  if (c.k() < 2) throw ArgumentError("exact linear bias needs at least two clusters");
  double cross = 0.0;
  for (std::size_t i = 0; i < folded.n(); ++i) {
    double row = 0.0;
    for (const Neighbor& nb : folded.row(i)) {
      if (c.label(nb.index) != c.label(i)) row += nb.weight;
    }
    cross += gamma[i] * row;
  }
  const double n = static_cast<double>(c.size());
  const double k = static_cast<double>(c.k());
  return -(2.0 / n) * (k / (k - 1.0)) * cross;
}

std::uint64_t count_assignments(std::size_t k, std::size_t k_t) {
  if (k_t > k) return 0;
  k_t = std::min(k_t, k - k_t);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t result = 1;
  for (std::size_t j = 1; j <= k_t; ++j) {
    // result * (k - k_t + j) / j stays integral at every step.
    const std::uint64_t factor = k - k_t + j;
    const std::uint64_t g = std::gcd(result, j);
    const std::uint64_t reduced = result / g;
    const std::uint64_t f = factor / (j / g);
    if (reduced > kMax / f) return kMax;
    result = reduced * f;
  }
  return result;
}

double brute_force_bias(const BipartiteGraph& g, const Clustering& c, std::size_t k_t,
                        const OutcomeModel& model, NormalizationMode mode) {
  const std::size_t n = g.n_experimental();
  if (c.size() != n) throw ArgumentError("clustering does not match the graph");
  if (k_t == 0 || k_t >= c.k()) {
    throw ArgumentError("treated cluster count must satisfy 0 < k_t < k");
  }
  const std::uint64_t total = count_assignments(c.k(), k_t);
  if (total > kMaxEnumeration) {
    throw ResourceError("brute-force enumeration over " + std::to_string(total) +
                        " assignments exceeds the limit of " + std::to_string(kMaxEnumeration));
  }
  const double tau = true_tate(model, n);

  std::vector<std::size_t> chosen(k_t);
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  std::vector<char> treated(c.k());
  Assignment a;
  a.z.resize(n);
  a.k = c.k();
  a.k_t = k_t;
  double sum = 0.0;
  std::uint64_t count = 0;
  for (;;) {
    std::fill(treated.begin(), treated.end(), 0);
    for (std::size_t t : chosen) treated[t] = 1;
    for (std::size_t i = 0; i < n; ++i) a.z[i] = treated[c.label(i)] ? 1 : -1;
    const ExposureProfile p = compute_profile(g, a, mode);
    sum += dim_estimate(expected_outcomes(model, a, p.exposures), a);
    ++count;

    // Next k_t-combination in lexicographic order.
    std::size_t pos = k_t;
    while (pos > 0 && chosen[pos - 1] == c.k() - k_t + pos - 1) --pos;
    if (pos == 0) break;
    ++chosen[pos - 1];
    for (std::size_t q = pos; q < k_t; ++q) chosen[q] = chosen[q - 1] + 1;
  }
  return sum / static_cast<double>(count) - tau;
}

BoundCheck lemma_bound_check(const BipartiteGraph& g, const Clustering& c, std::size_t k_t,
                             const OutcomeModel& model) {
  const FoldedGraph folded = fold_graph(g, NormalizationMode::full());
  const double h = objective_h(folded, c);
  const double n = static_cast<double>(c.size());
  const double k = static_cast<double>(c.k());
  BoundCheck out;
  if (const auto* lip = std::get_if<LipschitzOutcome>(&model)) {
    out.bound = (2.0 / n) * (k / (k - 1.0)) * lip->model.lipschitz * h;
  } else if (const auto* del = std::get_if<DeltaOutcome>(&model)) {
    del->model.validate();
    out.bound = (2.0 * DeltaModel::kOutcomeBound / (n * del->model.delta)) * (k / (k - 1.0)) * h;
  } else {
    throw ArgumentError("bound checks apply to the Lipschitz and delta models only");
  }
  out.measured = std::abs(brute_force_bias(g, c, k_t, model));
  out.holds = out.measured <= out.bound + 1e-10;
  return out;
}

double sbm_two_hop_isolation_prob(double p, double q, std::size_t m, std::size_t n, std::size_t k) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
    throw ArgumentError("probabilities must lie in [0, 1]");
  }
  if (k == 0) throw ArgumentError("group count must be positive");
  const double kk = static_cast<double>(k);
  const double exponent = 2.0 * static_cast<double>(m) * static_cast<double>(n) / (kk * kk);
  if (exponent == 0.0) return 1.0;
  return std::exp(exponent * std::log1p(-p * q));
}

void ExperimentConfig::validate() const {
  if (draws < 2) throw ArgumentError("an experiment needs at least two draws");
  if (bootstrap_resamples == 0) throw ArgumentError("bootstrap needs at least one resample");
  if (ips_delta < 0.0 || !std::isfinite(ips_delta)) {
    throw ArgumentError("IPS exposure threshold must be finite and >= 0");
  }
  if (ips_delta > 0.0 && propensity_draws == 0) {
    throw ArgumentError("IPS needs at least one propensity draw");
  }
  if (tau_replications == 0) throw ArgumentError("tau replications must be positive");
}

PointMetrics point_metrics(std::span<const double> estimates, double tau,
                           std::span<const double> tau_replicates) {
  if (estimates.empty()) throw ArgumentError("no estimates to summarize");
  if (!tau_replicates.empty()) {
    double s = 0.0;
    for (double v : tau_replicates) s += v;
    tau = s / static_cast<double>(tau_replicates.size());
  }
  const double n = static_cast<double>(estimates.size());
  double sum = 0.0;
  for (double v : estimates) sum += v;
  PointMetrics m;
  m.tau = tau;
  m.mean = sum / n;
  m.bias = m.mean - tau;
  m.relative_bias = std::abs(m.bias) / std::abs(tau);
  double ss = 0.0;
  double sq = 0.0;
  for (double v : estimates) {
    ss += (v - m.mean) * (v - m.mean);
    sq += (v - tau) * (v - tau);
  }
  m.std = std::sqrt(ss / n);
  m.rmse = std::sqrt(sq / n);
  return m;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ArgumentError("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

Interval percentile_interval(double value, std::vector<double>& samples) {
  std::sort(samples.begin(), samples.end());
  return {value, quantile_sorted(samples, 0.025), quantile_sorted(samples, 0.975)};
}

}  // namespace

BootstrapIntervals bootstrap_metrics(std::span<const double> estimates, double tau,
                                     std::span<const double> tau_replicates,
                                     std::size_t resamples, std::uint64_t seed) {
  const PointMetrics point = point_metrics(estimates, tau, tau_replicates);
  std::vector<PointMetrics> boot(resamples);
  const std::size_t n = estimates.size();
  const std::size_t r = tau_replicates.size();

#pragma omp parallel
  {
    std::vector<double> est(n);
    std::vector<double> reps(r);
#pragma omp for schedule(static)
    for (std::size_t b = 0; b < resamples; ++b) {
      Rng rng = make_rng(seed, b, Stream::bootstrap);
      for (std::size_t d = 0; d < n; ++d) est[d] = estimates[uniform_below(rng, n)];
      for (std::size_t d = 0; d < r; ++d) reps[d] = tau_replicates[uniform_below(rng, r)];
      boot[b] = point_metrics(est, tau, reps);
    }
  }

  std::vector<double> samples(resamples);
  BootstrapIntervals out;
  auto interval = [&](double value, double PointMetrics::*field) {
    for (std::size_t b = 0; b < resamples; ++b) samples[b] = boot[b].*field;
    return percentile_interval(value, samples);
  };
  out.mean = interval(point.mean, &PointMetrics::mean);
  out.tau = interval(point.tau, &PointMetrics::tau);
  out.bias = interval(point.bias, &PointMetrics::bias);
  out.relative_bias = interval(point.relative_bias, &PointMetrics::relative_bias);
  out.std = interval(point.std, &PointMetrics::std);
  out.rmse = interval(point.rmse, &PointMetrics::rmse);
  return out;
}

namespace {

double sample_std_error(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

std::vector<EvalReport> run_experiment(const BipartiteGraph& g, std::span<const DesignSpec> designs,
                                       const OutcomeModel& model, const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n = g.n_experimental();
  const bool market = std::holds_alternative<MarketplaceOutcome>(model);
  MarketTypes types;
  MarketplaceTate market_tau;
  double tau = 0.0;
  if (market) {
    const auto& spec = std::get<MarketplaceOutcome>(model).spec;
    if (spec.n_customers != n) {
      throw ArgumentError("marketplace has " + std::to_string(spec.n_customers) +
                          " customers, graph has " + std::to_string(n) + " experimental units");
    }
    types = market_types(spec);
    market_tau = marketplace_tate(spec, cfg.tau_replications, cfg.seed);
  } else {
    tau = true_tate(model, n);
  }
  const FoldedGraph folded = fold_graph(g, cfg.mode);

  std::vector<EvalReport> reports;
  for (std::size_t di = 0; di < designs.size(); ++di) {
    const auto start = std::chrono::steady_clock::now();
    const DesignSpec& design = designs[di];
    design.validate();
    const Clustering clustering = design.clustering(n);
    if (clustering.size() != n) {
      throw ArgumentError("design '" + design.name + "' covers " +
                          std::to_string(clustering.size()) + " units, graph has " +
                          std::to_string(n));
    }

    EvalReport rep;
    rep.design = design.name;
    rep.model = model_name(model);
    rep.objective_h = objective_h(folded, clustering);
    rep.objective_trvar = objective_trvar(g, clustering);
    rep.draws = cfg.draws;
    rep.seed = cfg.seed;
    rep.tau_replicates = market_tau.replicates;

    PropensityTable table;
    rep.has_ips = cfg.ips_delta > 0.0;
    if (rep.has_ips) {
      DesignSpec prop = design;
      prop.seed = derive_seed(design.seed, 0, Stream::propensity);
      table = estimate_propensities(prop, g, cfg.ips_delta, cfg.propensity_draws, cfg.mode);
    }

    rep.estimates.resize(cfg.draws);
    std::vector<double> ips(rep.has_ips ? cfg.draws : 0);
    std::vector<std::size_t> skipped(cfg.draws, 0);
    std::vector<std::size_t> clamped(cfg.draws, 0);
    detail::ParallelErrors errors;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t d = 0; d < cfg.draws; ++d) {
      errors.run(d, [&] {
        const Assignment a = sample_assignment(design, d, n);
        const ExposureProfile p = compute_profile(g, a, cfg.mode);
        Rng rng = make_rng(cfg.seed, d, Stream::outcome);
        std::vector<double> y;
        if (market) {
          const auto& spec = std::get<MarketplaceOutcome>(model).spec;
          y.assign(n, 0.0);
          for (std::size_t round = 0; round < spec.outcome_rounds; ++round) {
            const MarketRound mr = marketplace_round(spec, types, a.z, rng);
            for (std::size_t i = 0; i < n; ++i) y[i] += mr.y[i];
            clamped[d] += mr.clamped;
          }
          if (spec.outcome_rounds > 1) {
            for (double& v : y) v /= static_cast<double>(spec.outcome_rounds);
          }
        } else {
          y = simulate_outcomes(model, nullptr, a, p.exposures, rng);
        }
        rep.estimates[d] = dim_estimate(y, a);
        if (rep.has_ips) {
          const IpsResult r = ips_estimate(y, a, p.exposures, table);
          ips[d] = r.estimate;
          skipped[d] = r.skipped;
        }
      });
    }
    errors.rethrow();

    const std::uint64_t boot_seed = derive_seed(cfg.seed, di, Stream::bootstrap);
    rep.dim = bootstrap_metrics(rep.estimates, tau, rep.tau_replicates, cfg.bootstrap_resamples,
                                boot_seed);
    rep.std_error = sample_std_error(rep.estimates);
    if (rep.has_ips) {
      rep.ips = bootstrap_metrics(ips, tau, rep.tau_replicates, cfg.bootstrap_resamples, boot_seed);
    }
    for (std::size_t d = 0; d < cfg.draws; ++d) {
      rep.ips_skipped += skipped[d];
      rep.clamped += clamped[d];
    }
    rep.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::string results_header() {
  return "schema,design,objective_h,objective_trvar,metric,value,ci_lo,ci_hi,draws,seed\n";
}

namespace {

void add_row(std::string& out, const EvalReport& r, std::string_view metric, double value,
             const double* lo, const double* hi) {
  out += std::to_string(kResultsSchema);
  out += ',';
  out += r.design;
  out += ',';
  out += format_double(r.objective_h);
  out += ',';
  out += format_double(r.objective_trvar);
  out += ',';
  out += metric;
  out += ',';
  out += format_double(value);
  out += ',';
  if (lo != nullptr) out += format_double(*lo);
  out += ',';
  if (hi != nullptr) out += format_double(*hi);
  out += ',';
  out += std::to_string(r.draws);
  out += ',';
  out += std::to_string(r.seed);
  out += '\n';
}

void add_interval(std::string& out, const EvalReport& r, std::string_view metric,
                  const Interval& iv) {
  add_row(out, r, metric, iv.value, &iv.lo, &iv.hi);
}

void add_block(std::string& out, const EvalReport& r, std::string_view prefix,
               const BootstrapIntervals& b) {
  const std::string p(prefix);
  add_interval(out, r, p + "mean", b.mean);
  add_interval(out, r, p + "bias", b.bias);
  add_interval(out, r, p + "relative_bias", b.relative_bias);
  add_interval(out, r, p + "std", b.std);
  add_interval(out, r, p + "rmse", b.rmse);
}

}  // namespace

std::string format_results(std::span<const EvalReport> reports) {
  std::string out;
  for (const EvalReport& r : reports) {
    if (r.tau_replicates.empty()) {
      add_row(out, r, "tau", r.dim.tau.value, nullptr, nullptr);
    } else {
      add_interval(out, r, "tau", r.dim.tau);
    }
    add_block(out, r, "", r.dim);
    add_row(out, r, "std_error", r.std_error, nullptr, nullptr);
    if (r.has_ips) {
      add_block(out, r, "ips_", r.ips);
      add_row(out, r, "ips_skipped", static_cast<double>(r.ips_skipped), nullptr, nullptr);
    }
    if (r.model == "marketplace") {
      add_row(out, r, "clamped", static_cast<double>(r.clamped), nullptr, nullptr);
    }
  }
  return out;
}

void append_results(const std::string& path, std::span<const EvalReport> reports) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw ResourceError("cannot open '" + path + "' for appending");
  if (fresh) out << results_header();
  out << format_results(reports);
  if (!out) throw ResourceError("failed writing '" + path + "'");
}

std::string render_report(std::string_view results_csv) {
  struct Row {
    std::string metric, value, lo, hi;
  };
  struct Block {
    std::string design, h, trvar, draws, seed;
    std::vector<Row> rows;
  };
  std::vector<Block> blocks;
  std::map<std::string, std::size_t> index;

  std::size_t line_no = 0;
  bool header_seen = false;
  while (!results_csv.empty()) {
    const auto nl = results_csv.find('\n');
    std::string_view line = results_csv.substr(0, nl);
    results_csv = nl == std::string_view::npos ? std::string_view{} : results_csv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.rfind("schema,", 0) == 0) {
      header_seen = true;
      continue;
    }
    if (!header_seen) throw ArgumentError("results file is missing its header line");
    std::vector<std::string> f;
    std::size_t startpos = 0;
    for (;;) {
      const auto comma = line.find(',', startpos);
      f.emplace_back(line.substr(startpos, comma == std::string_view::npos ? comma : comma - startpos));
      if (comma == std::string_view::npos) break;
      startpos = comma + 1;
    }
    if (f.size() != 10) {
      throw ArgumentError("line " + std::to_string(line_no) + ": expected 10 fields, got " +
                          std::to_string(f.size()));
    }
    if (f[0] != std::to_string(kResultsSchema)) {
      throw ArgumentError("line " + std::to_string(line_no) + ": unsupported schema " + f[0]);
    }
    const std::string key = f[1] + '\x1f' + f[8] + '\x1f' + f[9];
    auto [it, inserted] = index.emplace(key, blocks.size());
    if (inserted) blocks.push_back({f[1], f[2], f[3], f[8], f[9], {}});
    blocks[it->second].rows.push_back({f[4], f[5], f[6], f[7]});
  }

  std::string out;
  char buf[256];
  for (const Block& b : blocks) {
    std::snprintf(buf, sizeof buf, "design %s  draws %s  seed %s  H %s  trvar %s\n",
                  b.design.c_str(), b.draws.c_str(), b.seed.c_str(), b.h.c_str(), b.trvar.c_str());
    out += buf;
    std::snprintf(buf, sizeof buf, "  %-18s %16s %16s %16s\n", "metric", "value", "ci_lo", "ci_hi");
    out += buf;
    for (const Row& r : b.rows) {
      auto cell = [](const std::string& s) {
        if (s.empty()) return std::string("-");
        char tmp[64];
        std::snprintf(tmp, sizeof tmp, "%.6g", parse_double(s));
        return std::string(tmp);
      };
      std::snprintf(buf, sizeof buf, "  %-18s %16s %16s %16s\n", r.metric.c_str(),
                    cell(r.value).c_str(), cell(r.lo).c_str(), cell(r.hi).c_str());
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace bicr

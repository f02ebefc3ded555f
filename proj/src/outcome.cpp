#include "bicr/outcome.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "bicr/errors.hpp"
#include "bicr/io.hpp"
#include "parallel_errors.hpp"

namespace bicr {

namespace {

void check_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ArgumentError(std::string(what) + " has length " + std::to_string(got) + ", expected " +
                        std::to_string(want));
  }
}

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ArgumentError(std::string(what) + " contains a non-finite entry");
  }
}

}  // namespace

void LinearCoefficients::validate() const {
  check_length(beta.size(), alpha.size(), "beta");
  check_length(gamma.size(), alpha.size(), "gamma");
  check_finite(alpha, "alpha");
  check_finite(beta, "beta");
  check_finite(gamma, "gamma");
}

LinearCoefficients preset_coefficients(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0, Stream::coefficients);
  std::normal_distribution<double> normal(0.0, 1.0);
  LinearCoefficients c;
  c.alpha.resize(n);
  c.beta.resize(n);
  c.gamma.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.alpha[i] = normal(rng);
    c.beta[i] = 1.0 + normal(rng);
    c.gamma[i] = -1.0 + normal(rng);
  }
  return c;
}

std::vector<double> simulate_linear(const LinearCoefficients& coef, const Assignment& z,
                                    std::span<const double> exposures) {
  coef.validate();
  check_length(z.size(), coef.size(), "assignment");
  check_length(exposures.size(), coef.size(), "exposures");
  std::vector<double> y(coef.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = coef.alpha[i] + coef.beta[i] * z.z[i] + coef.gamma[i] * exposures[i];
  }
  return y;
}

double apply_shape(LipschitzShape shape, double x) {
  switch (shape) {
    case LipschitzShape::identity:
      return x;
    case LipschitzShape::absolute:
      return std::abs(x);
    case LipschitzShape::clamp:
      return std::clamp(x, -0.5, 0.5);
    case LipschitzShape::sine:
      return std::sin(x);
  }
  throw ArgumentError("unknown Lipschitz shape");
}

std::string shape_name(LipschitzShape shape) {
  switch (shape) {
    case LipschitzShape::identity:
      return "identity";
    case LipschitzShape::absolute:
      return "abs";
    case LipschitzShape::clamp:
      return "clamp";
    case LipschitzShape::sine:
      return "sin";
  }
  throw ArgumentError("unknown Lipschitz shape");
}

LipschitzShape parse_shape(std::string_view name) {
  for (LipschitzShape s : kAllShapes) {
    if (shape_name(s) == name) return s;
  }
  throw ArgumentError("unknown Lipschitz shape '" + std::string(name) +
                      "' (expected identity, abs, clamp or sin)");
}

void LipschitzModel::validate() const {
  check_length(beta.size(), alpha.size(), "beta");
  check_finite(alpha, "alpha");
  check_finite(beta, "beta");
  if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) {
    throw ArgumentError("Lipschitz constant must be finite and >= 0");
  }
}

std::vector<double> simulate_lipschitz(const LipschitzModel& m, const Assignment& z,
                                       std::span<const double> exposures) {
  m.validate();
  check_length(z.size(), m.alpha.size(), "assignment");
  check_length(exposures.size(), m.alpha.size(), "exposures");
  std::vector<double> y(m.alpha.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = m.alpha[i] + m.beta[i] * z.z[i] + m.lipschitz * apply_shape(m.shape, exposures[i]);
  }
  return y;
}

void DeltaModel::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ArgumentError("delta must be positive, got " + std::to_string(delta));
  }
}

bool within_delta(int z, double exposure, double delta) {
  return std::abs(exposure - static_cast<double>(z)) < delta;
}

std::vector<double> simulate_delta(const Assignment& z, std::span<const double> exposures,
                                   const DeltaModel& m, Rng& rng) {
  m.validate();
  check_length(exposures.size(), z.size(), "exposures");
  std::vector<double> y(z.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = within_delta(z.z[i], exposures[i], m.delta) ? -static_cast<double>(z.z[i])
                                                        : 2.0 * uniform01(rng) - 1.0;
  }
  return y;
}

void MarketplaceSpec::validate() const {
  if (n_types == 0) throw ArgumentError("marketplace needs at least one type");
  if (!(phi_same >= 0.0 && phi_same <= 1.0) || !(phi_diff >= 0.0 && phi_diff <= 1.0)) {
    throw ArgumentError("application probabilities must lie in [0, 1]");
  }
  if (!(alpha_lift >= 0.0) || !std::isfinite(alpha_lift)) {
    throw ArgumentError("alpha_lift must be finite and >= 0");
  }
  if (outcome_rounds == 0) throw ArgumentError("outcome_rounds must be positive");
}

MarketTypes market_types(const MarketplaceSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed, 0, Stream::graph);
  MarketTypes t;
  t.customer.resize(spec.n_customers);
  t.listing.resize(spec.n_listings);
  for (auto& c : t.customer) c = static_cast<std::size_t>(uniform_below(rng, spec.n_types));
  for (auto& l : t.listing) l = static_cast<std::size_t>(uniform_below(rng, spec.n_types));
  return t;
}

MarketRound marketplace_round(const MarketplaceSpec& spec, const MarketTypes& types,
                              std::span<const int> z, Rng& rng) {
  const std::size_t n = spec.n_customers;
  const std::size_t m = spec.n_listings;
  if (!z.empty()) check_length(z.size(), n, "assignment");
  check_length(types.customer.size(), n, "customer types");
  check_length(types.listing.size(), m, "listing types");

  MarketRound round;
  round.y.assign(n, 0.0);
  std::vector<std::vector<std::size_t>> applicants(m);
  for (std::size_t i = 0; i < n; ++i) {
    const bool treated = !z.empty() && z[i] > 0;
    for (std::size_t s = 0; s < m; ++s) {
      double p = types.customer[i] == types.listing[s] ? spec.phi_same : spec.phi_diff;
      if (treated) {
        p *= spec.alpha_lift;
        if (p > 1.0) {
          p = 1.0;
          ++round.clamped;
        }
      }
      if (uniform01(rng) < p) {
        applicants[s].push_back(i);
        round.applications.emplace_back(i, s);
      }
    }
  }
  for (std::size_t s = 0; s < m; ++s) {
    const double v = uniform01(rng);
    if (applicants[s].empty()) continue;
    const auto pick = std::min(applicants[s].size() - 1,
                               static_cast<std::size_t>(v * static_cast<double>(applicants[s].size())));
    const std::size_t i = applicants[s][pick];
    round.bookings.emplace_back(i, s);
    round.y[i] = 1.0;
  }
  return round;
}

BipartiteGraph build_history_graph(const MarketplaceSpec& spec) {
  const MarketTypes types = market_types(spec);
  std::map<std::pair<std::size_t, std::size_t>, double> counts;
  for (std::size_t r = 0; r < spec.rounds_history; ++r) {
    Rng rng = make_rng(spec.seed, r + 1, Stream::graph);
    const MarketRound round = marketplace_round(spec, types, {}, rng);
    const auto& events =
        spec.history_weights == HistoryWeights::bookings ? round.bookings : round.applications;
    for (const auto& key : events) counts[key] += 1.0;
  }
  std::vector<Edge> edges;
  edges.reserve(counts.size());
  for (const auto& [key, w] : counts) edges.push_back({key.first, key.second, w});
  return BipartiteGraph(spec.n_customers, spec.n_listings, std::move(edges));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ArgumentError("invalid value '" + std::string(value) + "' for key '" + std::string(key) +
                        "'");
  }
  return out;
}

}  // namespace

MarketplaceSpec parse_marketplace_spec(std::string_view text) {
  MarketplaceSpec spec;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "n_customers") {
      spec.n_customers = parse_number<std::size_t>(key, value);
    } else if (key == "n_listings") {
      spec.n_listings = parse_number<std::size_t>(key, value);
    } else if (key == "n_types") {
      spec.n_types = parse_number<std::size_t>(key, value);
    } else if (key == "phi_same") {
      spec.phi_same = parse_number<double>(key, value);
    } else if (key == "phi_diff") {
      spec.phi_diff = parse_number<double>(key, value);
    } else if (key == "alpha_lift") {
      spec.alpha_lift = parse_number<double>(key, value);
    } else if (key == "rounds_history") {
      spec.rounds_history = parse_number<std::size_t>(key, value);
    } else if (key == "outcome_rounds") {
      spec.outcome_rounds = parse_number<std::size_t>(key, value);
    } else if (key == "history_weights") {
      if (value == "bookings") {
        spec.history_weights = HistoryWeights::bookings;
      } else if (value == "applications") {
        spec.history_weights = HistoryWeights::applications;
      } else {
        throw ArgumentError("history_weights must be bookings or applications");
      }
    } else if (key == "seed") {
      spec.seed = parse_number<std::uint64_t>(key, value);
    } else {
      throw ArgumentError("unknown marketplace key '" + std::string(key) + "'");
    }
  }
  spec.validate();
  return spec;
}

std::string format_marketplace_spec(const MarketplaceSpec& spec) {
  std::ostringstream out;
  out << "n_customers=" << spec.n_customers << '\n'
      << "n_listings=" << spec.n_listings << '\n'
      << "n_types=" << spec.n_types << '\n'
      << "phi_same=" << format_double(spec.phi_same) << '\n'
      << "phi_diff=" << format_double(spec.phi_diff) << '\n'
      << "alpha_lift=" << format_double(spec.alpha_lift) << '\n'
      << "rounds_history=" << spec.rounds_history << '\n'
      << "outcome_rounds=" << spec.outcome_rounds << '\n'
      << "history_weights="
      << (spec.history_weights == HistoryWeights::bookings ? "bookings" : "applications") << '\n'
      << "seed=" << spec.seed << '\n';
  return out.str();
}

std::string model_name(const OutcomeModel& model) {
  switch (model.index()) {
    case 0:
      return "linear";
    case 1:
      return "lipschitz";
    case 2:
      return "delta";
    default:
      return "marketplace";
  }
}

std::vector<double> simulate_outcomes(const OutcomeModel& model, const MarketTypes* types,
                                      const Assignment& z, std::span<const double> exposures,
                                      Rng& rng) {
  if (const auto* lin = std::get_if<LinearOutcome>(&model)) {
    return simulate_linear(lin->coef, z, exposures);
  }
  if (const auto* lip = std::get_if<LipschitzOutcome>(&model)) {
    return simulate_lipschitz(lip->model, z, exposures);
  }
  if (const auto* del = std::get_if<DeltaOutcome>(&model)) {
    return simulate_delta(z, exposures, del->model, rng);
  }
  const auto& spec = std::get<MarketplaceOutcome>(model).spec;
  MarketTypes local;
  if (types == nullptr) {
    local = market_types(spec);
    types = &local;
  }
  std::vector<double> y(spec.n_customers, 0.0);
  for (std::size_t r = 0; r < spec.outcome_rounds; ++r) {
    const MarketRound round = marketplace_round(spec, *types, z.z, rng);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += round.y[i];
  }
  if (spec.outcome_rounds > 1) {
    for (double& v : y) v /= static_cast<double>(spec.outcome_rounds);
  }
  return y;
}

std::vector<double> expected_outcomes(const OutcomeModel& model, const Assignment& z,
                                      std::span<const double> exposures) {
  if (const auto* lin = std::get_if<LinearOutcome>(&model)) {
    return simulate_linear(lin->coef, z, exposures);
  }
  if (const auto* lip = std::get_if<LipschitzOutcome>(&model)) {
    return simulate_lipschitz(lip->model, z, exposures);
  }
  if (const auto* del = std::get_if<DeltaOutcome>(&model)) {
    del->model.validate();
    check_length(exposures.size(), z.size(), "exposures");
    std::vector<double> y(z.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] = within_delta(z.z[i], exposures[i], del->model.delta) ? -static_cast<double>(z.z[i])
                                                                   : 0.0;
    }
    return y;
  }
  throw ArgumentError("the marketplace model has no closed-form conditional expectation");
}

double true_tate(const OutcomeModel& model, std::size_t n) {
  if (const auto* lin = std::get_if<LinearOutcome>(&model)) {
    lin->coef.validate();
    check_length(lin->coef.size(), n, "coefficients");
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += 2.0 * (lin->coef.beta[i] + lin->coef.gamma[i]);
    return sum / static_cast<double>(n);
  }
  if (const auto* lip = std::get_if<LipschitzOutcome>(&model)) {
    const LipschitzModel& m = lip->model;
    m.validate();
    check_length(m.alpha.size(), n, "coefficients");
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += 2.0 * m.beta[i];
    const double spill = m.lipschitz * (apply_shape(m.shape, 1.0) - apply_shape(m.shape, -1.0));
    return sum / static_cast<double>(n) + spill;
  }
  if (std::holds_alternative<DeltaOutcome>(model)) return -2.0;
  throw ArgumentError("the marketplace effect has no closed form; use marketplace_tate");
}

MarketplaceTate marketplace_tate(const MarketplaceSpec& spec, std::size_t replications,
                                 std::uint64_t seed) {
  if (replications == 0) throw ArgumentError("marketplace_tate needs at least one replication");
  const MarketTypes types = market_types(spec);
  const Assignment treated = Assignment::constant(spec.n_customers, 1);
  const Assignment control = Assignment::constant(spec.n_customers, -1);
  const OutcomeModel model = MarketplaceOutcome{spec};
  const double n = static_cast<double>(spec.n_customers);

  MarketplaceTate out;
  out.replicates.resize(replications);
  detail::ParallelErrors errors;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t r = 0; r < replications; ++r) {
    errors.run(r, [&] {
      Rng rng_t = make_rng(seed, r, Stream::tau);
      Rng rng_c = make_rng(seed, r, Stream::tau);
      const auto y_t = simulate_outcomes(model, &types, treated, {}, rng_t);
      const auto y_c = simulate_outcomes(model, &types, control, {}, rng_c);
      double diff = 0.0;
      for (std::size_t i = 0; i < y_t.size(); ++i) diff += y_t[i] - y_c[i];
      out.replicates[r] = n > 0 ? diff / n : 0.0;
    });
  }
  errors.rethrow();
  double sum = 0.0;
  for (double v : out.replicates) sum += v;
  out.value = sum / static_cast<double>(replications);
  return out;
}

}  // namespace bicr

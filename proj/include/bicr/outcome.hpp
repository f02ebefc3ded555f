#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "bicr/graph.hpp"
#include "bicr/rng.hpp"

namespace bicr {

struct LinearCoefficients {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<double> gamma;

  std::size_t size() const { return alpha.size(); }
  // Throws ArgumentError on length mismatch or non-finite entries.
  void validate() const;
};

// alpha ~ N(0, 1), beta ~ N(1, 1), gamma ~ N(-1, 1), one draw per seed.
LinearCoefficients preset_coefficients(std::size_t n, std::uint64_t seed);

// Y_i = alpha_i + beta_i z_i + gamma_i e_i.
std::vector<double> simulate_linear(const LinearCoefficients& coef, const Assignment& z,
                                    std::span<const double> exposures);

// 1-Lipschitz maps on [-1, 1].
enum class LipschitzShape { identity, absolute, clamp, sine };
inline constexpr LipschitzShape kAllShapes[] = {LipschitzShape::identity, LipschitzShape::absolute,
                                                LipschitzShape::clamp, LipschitzShape::sine};
double apply_shape(LipschitzShape shape, double x);
std::string shape_name(LipschitzShape shape);
LipschitzShape parse_shape(std::string_view name);

struct LipschitzModel {
  std::vector<double> alpha;
  std::vector<double> beta;
  double lipschitz = 1.0;
  LipschitzShape shape = LipschitzShape::identity;

  void validate() const;
};

// Y_i = alpha_i + beta_i z_i + L g(e_i).
std::vector<double> simulate_lipschitz(const LipschitzModel& m, const Assignment& z,
                                       std::span<const double> exposures);

// Units within delta of their own assignment behave as if fully treated
// (Y = -1) or fully controlled (Y = +1); the rest draw Y uniformly on [-1, 1].
struct DeltaModel {
  double delta = 0.5;

  static constexpr double kOutcomeBound = 2.0;
  void validate() const;
};

bool within_delta(int z, double exposure, double delta);

std::vector<double> simulate_delta(const Assignment& z, std::span<const double> exposures,
                                   const DeltaModel& m, Rng& rng);

enum class HistoryWeights { bookings, applications };

struct MarketplaceSpec {
  std::size_t n_customers = 500;
  std::size_t n_listings = 1000;
  std::size_t n_types = 20;
  double phi_same = 0.016;
  double phi_diff = 0.0001;
  double alpha_lift = 1.0;
  std::size_t rounds_history = 12;
  std::size_t outcome_rounds = 1;  // rounds averaged into Y at evaluation time
  HistoryWeights history_weights = HistoryWeights::bookings;
  std::uint64_t seed = 0;

  void validate() const;
};

struct MarketTypes {
  std::vector<std::size_t> customer;
  std::vector<std::size_t> listing;
};

// Each customer and listing gets one of n_types uniformly, fixed by spec.seed.
MarketTypes market_types(const MarketplaceSpec& spec);

struct MarketRound {
  std::vector<std::pair<std::size_t, std::size_t>> bookings;  // (customer, listing)
  std::vector<std::pair<std::size_t, std::size_t>> applications;
  std::vector<double> y;  // 1 if the customer was booked at least once
  std::size_t clamped = 0;  // lifted probabilities capped at 1
};

// One application round. An empty z means all control.
MarketRound marketplace_round(const MarketplaceSpec& spec, const MarketTypes& types,
                              std::span<const int> z, Rng& rng);

// Experimental units are customers, interference units are listings; w_is
// counts bookings (or applications) over rounds_history all-control rounds.
BipartiteGraph build_history_graph(const MarketplaceSpec& spec);

// Reads/writes the flat key=value form; unknown keys are argument errors.
MarketplaceSpec parse_marketplace_spec(std::string_view text);
std::string format_marketplace_spec(const MarketplaceSpec& spec);

struct LinearOutcome {
  LinearCoefficients coef;
};
struct LipschitzOutcome {
  LipschitzModel model;
};
struct DeltaOutcome {
  DeltaModel model;
};
struct MarketplaceOutcome {
  MarketplaceSpec spec;
};
using OutcomeModel = std::variant<LinearOutcome, LipschitzOutcome, DeltaOutcome, MarketplaceOutcome>;

std::string model_name(const OutcomeModel& model);

// Draws outcomes for one assignment. Exposures are unused by the marketplace.
std::vector<double> simulate_outcomes(const OutcomeModel& model, const MarketTypes* types,
                                      const Assignment& z, std::span<const double> exposures,
                                      Rng& rng);

// E[Y | z, e]; impure units of the delta model average 0. Throws
// ArgumentError for the marketplace.
std::vector<double> expected_outcomes(const OutcomeModel& model, const Assignment& z,
                                      std::span<const double> exposures);

// Closed-form average total treatment effect. Throws ArgumentError for the
// marketplace, whose effect is simulated by marketplace_tate.
double true_tate(const OutcomeModel& model, std::size_t n);

struct MarketplaceTate {
  double value = 0.0;
  std::vector<double> replicates;  // mean(Y treated) - mean(Y control) per replication
};

// All-treated minus all-control under common random numbers.
MarketplaceTate marketplace_tate(const MarketplaceSpec& spec, std::size_t replications,
                                 std::uint64_t seed);

}  // namespace bicr

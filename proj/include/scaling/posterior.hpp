#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "scaling/constrained.hpp"
#include "scaling/rng.hpp"
#include "scaling/stats.hpp"

namespace scaling {

inline constexpr std::size_t kMaxHypotheses = 10'000;

struct UniformPrior {};
// Distribution of the width-n resampled network when the truth is a Dirichlet
// process of scale K over the codebook (Dirichlet(K/m,...,K/m) weights, one
// fair sign per codebook vector). Inconsistent sign assignments get zero mass.
struct DirichletMultinomialPrior {
  double K = 1.0;
};
using PriorSpec = std::variant<UniformPrior, DirichletMultinomialPrior, std::vector<double>>;

// Every (row, sign) assignment of n rows drawn from a small codebook.
struct HypothesisSpace {
  int d = 0;
  int K = 0;
  int n = 0;
  Eigen::MatrixXd codebook;  // m x d, unit rows
  std::vector<ConstrainedNetwork> hypotheses;
  std::vector<double> prior;
  std::optional<std::size_t> truth_index;
  // Dirichlet process scale behind a DirichletMultinomialPrior, if used.
  std::optional<double> dp_scale;
  // Per hypothesis: codebook row and sign of each of the n slots.
  std::vector<std::vector<int>> slot_rows;
  std::vector<std::vector<int>> slot_signs;

  std::size_t size() const { return hypotheses.size(); }
};

// Enumerates (2m)^n hypotheses in lexicographic order over (row index, sign)
// per slot. Throws SizeError above kMaxHypotheses.
HypothesisSpace build_tiny_space(int d, int K, const Eigen::MatrixXd& codebook, int n,
                                 const PriorSpec& prior);

// Space holding only hypothesis `index`, with prior 1 on it.
HypothesisSpace restrict_to(const HypothesisSpace& space, std::size_t index);

// Index of the hypothesis with the given per-slot rows and signs.
std::size_t hypothesis_index(const HypothesisSpace& space, std::span<const int> rows,
                             std::span<const int> signs);

// -sum p ln p over the prior.
double exact_entropy(const HypothesisSpace& space);

using Evaluator = std::function<double(std::span<const double>)>;

struct TrajectoryResult {
  std::vector<double> per_step_reducible_nats;
  double cumulative_mean_nats = 0.0;
  std::vector<double> posterior_final;
  // Posterior mass on space.truth_index after each update (empty when unset).
  std::vector<double> truth_posterior;
  // KL(truth || comparator) per step, when a comparator was supplied.
  std::vector<double> comparator_nats;
};

// Runs one exact-Bayes trajectory of length T: at each step draws
// X ~ N(0, I_d), records KL(P*_t || P~_t), samples the label from the truth and
// updates the log posterior. `comparator` is an optional fixed predictor whose
// per-step KL from the truth is recorded alongside.
TrajectoryResult run_trajectory(const HypothesisSpace& space, const Evaluator& truth, int T,
                                Rng& rng, const Evaluator* comparator = nullptr);

enum class TruthMode {
  WellSpecified,  // truth drawn from the prior (or fixed at truth_index)
  Coupled,        // truth drawn from the Dirichlet process over the codebook
  Singleton,      // scenario-level: space restricted to the truth hypothesis
};

struct ReducibleLossReport {
  TruthMode mode = TruthMode::WellSpecified;
  int T = 0;
  McEstimate loss;
  double entropy_nats = 0.0;
  std::optional<McEstimate> misspecification;  // coupled mode
  double bound = 0.0;                           // entropy/T (+ misspecification mean)
  double margin_stderr = 0.0;                   // stderr used in the 3-sigma test
  bool pass = false;
  std::vector<double> truth_posterior_mean;
  std::vector<double> truth_posterior_stderr;

  const ReducibleLossReport& require() const;
};

// Averages cumulative_mean_nats over `trials` independent trajectories and
// checks it against H(prior)/T (+ the coupled misspecification estimate).
// In coupled mode the prior must be uniform or DirichletMultinomialPrior so
// that H(prior) is the expected code length of the coupled F~.
ReducibleLossReport estimate_reducible_loss(const HypothesisSpace& space, TruthMode mode, int T,
                                            std::uint64_t trials, std::uint64_t seed);

// Scenario file: {d, K, n, codebook | codebook_size, prior, T, trials, mode, seed}.
struct Scenario {
  std::string name;
  int d = 3;
  int K = 3;
  int n = 2;
  Eigen::MatrixXd codebook;
  PriorSpec prior = UniformPrior{};
  int T = 50;
  std::uint64_t trials = 10'000;
  TruthMode mode = TruthMode::WellSpecified;
  std::uint64_t seed = 0;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& scenario);
nlohmann::json to_json(const ReducibleLossReport& report);
ReducibleLossReport run_scenario(const Scenario& scenario);

}  // namespace scaling

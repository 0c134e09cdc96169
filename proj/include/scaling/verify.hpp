#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "scaling/stats.hpp"

namespace scaling {

// KL( Bernoulli(sigmoid(g)) || Bernoulli(sigmoid(g_tilde)) ) in nats.
// Evaluated as the Bregman divergence of softplus,
//   softplus(g~) - softplus(g) - sigmoid(g) (g~ - g),
// which stays finite for |g|, |g~| up to several hundred.
double kl_bernoulli_sigmoid(double g, double g_tilde);

// Outcome of a one-sided Monte Carlo bound check: pass iff
// estimate.mean <= bound + 3 * estimate.std_error.
struct LemmaCheck {
  std::string name;
  double bound = 0.0;
  McEstimate estimate;
  bool pass = false;
  nlohmann::json extra = nlohmann::json::object();

  // Throws LemmaViolation naming the check and its parameters.
  const LemmaCheck& require() const;
};

nlohmann::json to_json(const LemmaCheck& check);
nlohmann::json to_json(const McEstimate& estimate);

// Distribution over (g, g~) pairs for the scalar KL <= squared-error check.
struct PairRegime {
  enum class Kind { Uniform, Gaussian } kind = Kind::Uniform;
  double a = -10.0;  // Uniform: lower end; Gaussian: mean
  double b = 10.0;   // Uniform: upper end; Gaussian: standard deviation

  static PairRegime uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static PairRegime gaussian(double mean, double sd) { return {Kind::Gaussian, mean, sd}; }
};

struct KlPointwiseReport {
  std::string regime;
  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  // max over pairs of KL - (g - g~)^2; <= 0 when the inequality holds.
  double max_excess = 0.0;
  double witness_g = 0.0;
  double witness_g_tilde = 0.0;
  double witness_kl = 0.0;
  std::uint64_t seed = 0;

  bool pass() const { return violations == 0; }
  const KlPointwiseReport& require() const;
};

nlohmann::json to_json(const KlPointwiseReport& report);

inline constexpr double kPointwiseTolerance = 1e-12;

// Checks KL(g||g~) <= (g-g~)^2 + 1e-12 pair by pair. `kl_scale` multiplies the
// KL and exists only as a negative control.
KlPointwiseReport mc_lemma_kl_vs_sq(const PairRegime& regime, std::uint64_t samples,
                                    std::uint64_t seed, double kl_scale = 1.0);

// Nested Monte Carlo settings: `outer` network draws, `inner` inputs each.
struct NestedMc {
  std::uint64_t outer = 1000;
  std::uint64_t inner = 100;
  std::uint64_t seed = 0;
  double tau = 1e-6;
  double kl_scale = 1.0;  // negative-control hook for the KL checks
};

// E[(F(X) - F~_{n,0}(X))^2] against (K+1)/n.
LemmaCheck mc_sq_error_n0(int d, int K, int n, const NestedMc& mc);

// E[(F~_{n,0}(X) - F~_{n,eps}(X))^2] against d(K+1)eps^2/n, with both
// networks sharing resampled atoms.
LemmaCheck mc_sq_error_quant(int d, int K, int n, double epsilon, const NestedMc& mc);

// E[KL(F(X) || F~_{n,eps}(X))] against 3K(1+d eps^2)/n. `extra` also carries
// the coupled squared-error estimate and the stderr of (sq - KL).
LemmaCheck mc_misspec_kl(int d, int K, int n, double epsilon, const NestedMc& mc);

// Mean number of distinct classes among n categorical draws from a
// stick-broken Dirichlet process of scale K, against K ln(1+n/K). `extra`
// carries the exact expectation sum_{i<n} K/(K+i) for reference.
LemmaCheck mc_distinct_atoms(int K, int n, std::uint64_t trials, std::uint64_t seed,
                             double tau = 1e-9);

// Moments of F(X) over joint network and input draws.
struct MomentReport {
  McEstimate first;   // E[F(X)], target 0
  McEstimate second;  // E[F(X)^2], target 1/2
  bool pass = false;  // both within 3 stderr of target
};

MomentReport mc_ground_truth_moments(int d, int K, const NestedMc& mc);

}  // namespace scaling

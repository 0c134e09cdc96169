#include "scaling/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "scaling/constrained.hpp"
#include "scaling/dgp.hpp"
#include "scaling/errors.hpp"
#include "scaling/parallel.hpp"

namespace scaling {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

LemmaCheck make_check(std::string name, double bound, const McEstimate& est) {
  LemmaCheck c;
  c.name = std::move(name);
  c.bound = bound;
  c.estimate = est;
  c.pass = est.mean <= bound + 3.0 * est.std_error;
  return c;
}

void check_nested(int d, int K, int n, const NestedMc& mc, const char* op) {
  if (d < 1 || K < 1 || n < 1) throw DomainError(fmt::format("{}: d, K, n must be >= 1", op));
  if (mc.outer < 2 || mc.inner < 1) {
    throw DomainError(fmt::format("{}: need outer >= 2 and inner >= 1", op));
  }
}

// Per outer draw: ground truth, width-n resample, and a block of inputs.
struct Draw {
  GroundTruthNetwork net;
  ConstrainedNetwork exact;
  Eigen::MatrixXd inputs;
};

Draw draw(int d, int K, int n, const NestedMc& mc, std::size_t o) {
  Rng rng = Rng::substream(mc.seed, o);
  Draw out;
  out.net = sample_ground_truth(d, K, mc.tau, rng);
  out.exact = sample_constrained(out.net, n, 0.0, rng);
  out.inputs = sample_inputs(d, mc.inner, rng);
  return out;
}

}  // namespace

double kl_bernoulli_sigmoid(double g, double g_tilde) {
  const double kl = softplus(g_tilde) - softplus(g) - sigmoid(g) * (g_tilde - g);
  return kl > 0.0 ? kl : 0.0;
}

const LemmaCheck& LemmaCheck::require() const {
  if (!pass) {
    throw LemmaViolation(fmt::format(
        "{} violated: estimate {:.6g} (stderr {:.3g}, {} samples, seed {}) exceeds bound {:.6g} + 3 stderr; {}",
        name, estimate.mean, estimate.std_error, estimate.samples, estimate.seed, bound,
        extra.dump()));
  }
  return *this;
}

nlohmann::json to_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"stderr", e.std_error}, {"samples", e.samples}, {"seed", e.seed}};
}

nlohmann::json to_json(const LemmaCheck& c) {
  nlohmann::json j{{"name", c.name},
                   {"bound", c.bound},
                   {"estimate", c.estimate.mean},
                   {"stderr", c.estimate.std_error},
                   {"samples", c.estimate.samples},
                   {"seed", c.estimate.seed},
                   {"pass", c.pass}};
  if (!c.extra.empty()) j["details"] = c.extra;
  return j;
}

const KlPointwiseReport& KlPointwiseReport::require() const {
  if (!pass()) {
    throw LemmaViolation(fmt::format(
        "KL <= squared error violated {} times in regime {}; witness g = {:.17g}, g~ = {:.17g}, "
        "KL = {:.17g}, (g-g~)^2 = {:.17g}",
        violations, regime, witness_g, witness_g_tilde, witness_kl,
        (witness_g - witness_g_tilde) * (witness_g - witness_g_tilde)));
  }
  return *this;
}

nlohmann::json to_json(const KlPointwiseReport& r) {
  return {{"regime", r.regime},
          {"samples", r.samples},
          {"violations", r.violations},
          {"max_excess", r.max_excess},
          {"witness", {{"g", r.witness_g}, {"g_tilde", r.witness_g_tilde}, {"kl", r.witness_kl}}},
          {"seed", r.seed},
          {"pass", r.pass()}};
}

KlPointwiseReport mc_lemma_kl_vs_sq(const PairRegime& regime, std::uint64_t samples,
                                    std::uint64_t seed, double kl_scale) {
  if (samples < 1) throw DomainError("mc_lemma_kl_vs_sq: samples must be >= 1");
  constexpr std::uint64_t kChunk = 1 << 16;
  const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;

  struct Partial {
    std::uint64_t violations = 0;
    double max_excess = -std::numeric_limits<double>::infinity();
    double g = 0.0, h = 0.0, kl = 0.0;
  };
  std::vector<Partial> partials(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = Rng::substream(seed, c);
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(samples, begin + kChunk);
    Partial& p = partials[c];
    for (std::uint64_t i = begin; i < end; ++i) {
      double g = 0.0;
      double h = 0.0;
      if (regime.kind == PairRegime::Kind::Uniform) {
        g = regime.a + (regime.b - regime.a) * rng.uniform();
        h = regime.a + (regime.b - regime.a) * rng.uniform();
      } else {
        g = regime.a + regime.b * rng.normal();
        h = regime.a + regime.b * rng.normal();
      }
      const double kl = kl_scale * kl_bernoulli_sigmoid(g, h);
      const double sq = (g - h) * (g - h);
      const double excess = kl - sq;
      if (excess > kPointwiseTolerance) ++p.violations;
      if (excess > p.max_excess) {
        p.max_excess = excess;
        p.g = g;
        p.h = h;
        p.kl = kl;
      }
    }
  });

  KlPointwiseReport report;
  report.regime = regime.kind == PairRegime::Kind::Uniform
                      ? fmt::format("uniform[{:g},{:g}]", regime.a, regime.b)
                      : fmt::format("normal({:g},{:g}^2)", regime.a, regime.b);
  report.samples = samples;
  report.seed = seed;
  report.max_excess = -std::numeric_limits<double>::infinity();
  for (const auto& p : partials) {
    report.violations += p.violations;
    if (p.max_excess > report.max_excess) {
      report.max_excess = p.max_excess;
      report.witness_g = p.g;
      report.witness_g_tilde = p.h;
      report.witness_kl = p.kl;
    }
  }
  return report;
}

LemmaCheck mc_sq_error_n0(int d, int K, int n, const NestedMc& mc) {
  check_nested(d, K, n, mc, "mc_sq_error_n0");
  std::vector<double> groups(mc.outer);
  parallel_for(mc.outer, [&](std::size_t o) {
    const Draw dr = draw(d, K, n, mc, o);
    const Eigen::VectorXd diff = eval_ground_truth(dr.net, dr.inputs) - eval_constrained(dr.exact, dr.inputs);
    groups[o] = diff.squaredNorm() / static_cast<double>(mc.inner);
  });
  auto check = make_check("dir_mult_sq_error", (K + 1.0) / n,
                          estimate_from_groups(groups, mc.outer * mc.inner, mc.seed));
  check.extra = {{"d", d}, {"K", K}, {"n", n}};
  return check;
}

LemmaCheck mc_sq_error_quant(int d, int K, int n, double epsilon, const NestedMc& mc) {
  check_nested(d, K, n, mc, "mc_sq_error_quant");
  if (!(epsilon > 0.0)) throw DomainError("mc_sq_error_quant: epsilon must be > 0");
  std::vector<double> groups(mc.outer);
  parallel_for(mc.outer, [&](std::size_t o) {
    const Draw dr = draw(d, K, n, mc, o);
    const ConstrainedNetwork quant = requantize(dr.exact, dr.net, epsilon);
    const Eigen::VectorXd diff = eval_constrained(dr.exact, dr.inputs) - eval_constrained(quant, dr.inputs);
    groups[o] = diff.squaredNorm() / static_cast<double>(mc.inner);
  });
  auto check = make_check("quantization_sq_error", d * (K + 1.0) * epsilon * epsilon / n,
                          estimate_from_groups(groups, mc.outer * mc.inner, mc.seed));
  check.extra = {{"d", d}, {"K", K}, {"n", n}, {"epsilon", epsilon}};
  return check;
}

LemmaCheck mc_misspec_kl(int d, int K, int n, double epsilon, const NestedMc& mc) {
  check_nested(d, K, n, mc, "mc_misspec_kl");
  if (!(epsilon >= 0.0)) throw DomainError("mc_misspec_kl: epsilon must be >= 0");
  std::vector<double> kl_groups(mc.outer);
  std::vector<double> sq_groups(mc.outer);
  std::vector<double> gap_groups(mc.outer);
  parallel_for(mc.outer, [&](std::size_t o) {
    const Draw dr = draw(d, K, n, mc, o);
    const ConstrainedNetwork quant = epsilon > 0.0 ? requantize(dr.exact, dr.net, epsilon) : dr.exact;
    const Eigen::VectorXd f = eval_ground_truth(dr.net, dr.inputs);
    const Eigen::VectorXd g = eval_constrained(quant, dr.inputs);
    double kl = 0.0;
    double sq = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      kl += mc.kl_scale * kl_bernoulli_sigmoid(f[i], g[i]);
      sq += (f[i] - g[i]) * (f[i] - g[i]);
    }
    const double inner = static_cast<double>(mc.inner);
    kl_groups[o] = kl / inner;
    sq_groups[o] = sq / inner;
    gap_groups[o] = (sq - kl) / inner;
  });
  const std::uint64_t total = mc.outer * mc.inner;
  auto check = make_check("misspecification_kl", 3.0 * K * (1.0 + d * epsilon * epsilon) / n,
                          estimate_from_groups(kl_groups, total, mc.seed));
  const McEstimate sq = estimate_from_groups(sq_groups, total, mc.seed);
  const McEstimate gap = estimate_from_groups(gap_groups, total, mc.seed);
  check.extra = {{"d", d},
                 {"K", K},
                 {"n", n},
                 {"epsilon", epsilon},
                 {"sq_error_mean", sq.mean},
                 {"sq_error_stderr", sq.std_error},
                 {"sq_minus_kl_stderr", gap.std_error},
                 {"kl_below_sq_error", check.estimate.mean <= sq.mean + 3.0 * gap.std_error}};
  return check;
}

LemmaCheck mc_distinct_atoms(int K, int n, std::uint64_t trials, std::uint64_t seed, double tau) {
  if (K < 1 || n < 1) throw DomainError("mc_distinct_atoms: K and n must be >= 1");
  if (trials < 1000) throw DomainError("mc_distinct_atoms: trials must be >= 1000");
  std::vector<double> counts(trials);
  parallel_for(trials, [&](std::size_t t) {
    Rng rng = Rng::substream(seed, t);
    double residual = 0.0;
    const std::vector<double> weights = stick_breaking(K, tau, rng, residual);
    std::vector<double> cumulative(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) cumulative[i] = acc += weights[i];
    std::vector<std::size_t> classes(static_cast<std::size_t>(n));
    for (auto& c : classes) {
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), rng.uniform() * acc);
      if (it == cumulative.end()) --it;
      c = static_cast<std::size_t>(it - cumulative.begin());
    }
    std::sort(classes.begin(), classes.end());
    counts[t] = static_cast<double>(std::unique(classes.begin(), classes.end()) - classes.begin());
  });
  double exact = 0.0;
  for (int i = 0; i < n; ++i) exact += static_cast<double>(K) / (K + i);
  auto check = make_check("distinct_classes", K * std::log1p(static_cast<double>(n) / K),
                          estimate_from_samples(counts, seed));
  check.extra = {{"K", K}, {"n", n}, {"exact_expectation", exact}};
  return check;
}

MomentReport mc_ground_truth_moments(int d, int K, const NestedMc& mc) {
  check_nested(d, K, 1, mc, "mc_ground_truth_moments");
  std::vector<double> first(mc.outer);
  std::vector<double> second(mc.outer);
  parallel_for(mc.outer, [&](std::size_t o) {
    Rng rng = Rng::substream(mc.seed, o);
    const GroundTruthNetwork net = sample_ground_truth(d, K, mc.tau, rng);
    const Eigen::VectorXd f = eval_ground_truth(net, sample_inputs(d, mc.inner, rng));
    first[o] = f.mean();
    second[o] = f.squaredNorm() / static_cast<double>(mc.inner);
  });
  MomentReport r;
  const std::uint64_t total = mc.outer * mc.inner;
  r.first = estimate_from_groups(first, total, mc.seed);
  r.second = estimate_from_groups(second, total, mc.seed);
  r.pass = std::abs(r.first.mean) <= 3.0 * r.first.std_error &&
           std::abs(r.second.mean - 0.5) <= 3.0 * r.second.std_error;
  return r;
}

}  // namespace scaling

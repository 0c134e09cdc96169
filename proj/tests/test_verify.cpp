#include <doctest.h>

#include <cmath>
#include <vector>

#include "scaling/errors.hpp"
#include "scaling/rng.hpp"
#include "scaling/verify.hpp"

using namespace scaling;

TEST_CASE("Bernoulli-sigmoid KL") {
  CHECK(kl_bernoulli_sigmoid(2.0, 0.0) == doctest::Approx(0.3278133254727377011).epsilon(1e-13));
  CHECK(kl_bernoulli_sigmoid(-3.0, 5.0) == doctest::Approx(4.578721011494841763).epsilon(1e-13));
  CHECK(kl_bernoulli_sigmoid(30.0, -20.0) == doctest::Approx(20.00000000205638123).epsilon(1e-13));
  CHECK(kl_bernoulli_sigmoid(1.7, 1.7) == 0.0);
  // Swapping the label of both Bernoullis leaves the divergence unchanged.
  CHECK(kl_bernoulli_sigmoid(1.3, -0.4) == doctest::Approx(kl_bernoulli_sigmoid(-1.3, 0.4)).epsilon(1e-14));
  for (double g = -700.0; g <= 700.0; g += 70.0) {
    for (double h = -700.0; h <= 700.0; h += 70.0) {
      const double kl = kl_bernoulli_sigmoid(g, h);
      CHECK(std::isfinite(kl));
      CHECK(kl >= 0.0);
      CHECK(kl <= (g - h) * (g - h) + kPointwiseTolerance);
    }
  }
}

TEST_CASE("pointwise KL <= squared logit gap") {
  for (const auto& regime : {PairRegime::uniform(-10.0, 10.0), PairRegime::gaussian(0.0, 3.0)}) {
    const auto r = mc_lemma_kl_vs_sq(regime, 1'000'000, 11);
    CHECK(r.samples == 1'000'000);
    CHECK(r.violations == 0);
    CHECK(r.max_excess <= kPointwiseTolerance);
    CHECK(r.pass());
    CHECK_NOTHROW(r.require());
  }
}

TEST_CASE("pointwise check catches a broken KL") {
  const auto r = mc_lemma_kl_vs_sq(PairRegime::uniform(-10.0, 10.0), 100'000, 11, 10.0);
  CHECK(r.violations > 0);
  CHECK(r.max_excess > 0.0);
  CHECK(10.0 * kl_bernoulli_sigmoid(r.witness_g, r.witness_g_tilde) ==
        doctest::Approx(r.witness_kl).epsilon(1e-12));
  CHECK_THROWS_AS(r.require(), LemmaViolation);
}

TEST_CASE("width-n resampling error") {
  NestedMc mc{.outer = 400, .inner = 50, .seed = 5};
  const int K = 10, n = 20;
  const auto c = mc_sq_error_n0(4, K, n, mc);
  CHECK(c.bound == doctest::Approx((K + 1.0) / n));
  CHECK(c.pass);
  // The exact value is K/(2n): per-atom variance of sqrt(K+1) ReLU(w.x) summed
  // against the DP weights.
  CHECK(std::abs(c.estimate.mean - K / (2.0 * n)) <= 4.0 * c.estimate.std_error);

  const auto wide = mc_sq_error_n0(4, K, 4 * n, mc);
  CHECK(wide.estimate.mean < c.estimate.mean);
  CHECK(std::abs(wide.estimate.mean - K / (8.0 * n)) <= 4.0 * wide.estimate.std_error);
}

TEST_CASE("quantization error") {
  NestedMc mc{.outer = 300, .inner = 50, .seed = 6};
  const auto tiny = mc_sq_error_quant(5, 10, 20, 1e-6, mc);
  CHECK(tiny.estimate.mean < 1e-9);
  const auto small = mc_sq_error_quant(5, 10, 20, 0.1, mc);
  const auto large = mc_sq_error_quant(5, 10, 20, 0.4, mc);
  CHECK(small.pass);
  CHECK(large.pass);
  CHECK(small.estimate.mean < large.estimate.mean);
  CHECK(small.bound == doctest::Approx(5 * 11 * 0.01 / 20));
}

TEST_CASE("misspecification KL") {
  NestedMc mc{.outer = 300, .inner = 50, .seed = 7};
  const auto c = mc_misspec_kl(3, 2, 5, 0.2, mc);
  CHECK(c.pass);
  CHECK(c.bound == doctest::Approx(3.0 * 2 * (1 + 3 * 0.04) / 5));
  CHECK(c.extra["kl_below_sq_error"].get<bool>());
  CHECK(c.estimate.mean <= c.extra["sq_error_mean"].get<double>());

  NestedMc broken = mc;
  broken.kl_scale = 1e3;
  const auto bad = mc_misspec_kl(3, 2, 5, 0.2, broken);
  CHECK_FALSE(bad.pass);
  CHECK_THROWS_AS(bad.require(), LemmaViolation);
}

TEST_CASE("nested MC is deterministic in the seed") {
  NestedMc mc{.outer = 50, .inner = 20, .seed = 9};
  const auto a = mc_sq_error_n0(3, 4, 6, mc);
  const auto b = mc_sq_error_n0(3, 4, 6, mc);
  CHECK(a.estimate.mean == b.estimate.mean);
  mc.seed = 10;
  CHECK(mc_sq_error_n0(3, 4, 6, mc).estimate.mean != a.estimate.mean);
  CHECK_THROWS_AS(mc_sq_error_n0(0, 4, 6, mc), DomainError);
}

TEST_CASE("distinct classes") {
  // One draw always has one class, above the K ln(1 + 1/K) bound.
  const auto one = mc_distinct_atoms(3, 1, 1000, 1);
  CHECK(one.estimate.mean == 1.0);
  CHECK_FALSE(one.pass);

  // The exact expectation sum K/(K+i) exceeds K ln(1 + n/K), so the bound
  // check is expected to fail here.
  const auto c = mc_distinct_atoms(2, 10, 20'000, 2);
  const double exact = c.extra["exact_expectation"].get<double>();
  CHECK(exact == doctest::Approx(55991.0 / 13860.0).epsilon(1e-14));
  CHECK(std::abs(c.estimate.mean - exact) <= 4.0 * c.estimate.std_error);
  CHECK_FALSE(c.pass);

  // Chinese restaurant process: draw i opens a new class w.p. K/(K+i).
  Rng rng(3);
  const int trials = 20'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    int tables = 0;
    for (int i = 0; i < 10; ++i) tables += rng.uniform() < 2.0 / (2.0 + i);
    sum += tables;
    sum_sq += tables * tables;
  }
  const double crp = sum / trials;
  const double crp_se = std::sqrt((sum_sq / trials - crp * crp) / trials);
  CHECK(std::abs(c.estimate.mean - crp) <=
        4.0 * std::hypot(c.estimate.std_error, crp_se));

  CHECK_THROWS_AS(mc_distinct_atoms(2, 10, 999, 2), DomainError);
}

TEST_CASE("ground-truth moments") {
  NestedMc mc{.outer = 400, .inner = 50, .seed = 4};
  const auto m = mc_ground_truth_moments(5, 10, mc);
  CHECK(m.pass);
  CHECK(std::abs(m.second.mean - 0.5) <= 4.0 * m.second.std_error);
  CHECK(std::abs(m.first.mean) <= 4.0 * m.first.std_error);
}

TEST_CASE("check serialization") {
  NestedMc mc{.outer = 20, .inner = 10, .seed = 1};
  const auto j = to_json(mc_sq_error_n0(3, 4, 6, mc));
  CHECK(j.contains("bound"));
  CHECK(j.contains("stderr"));
  CHECK(j["details"]["n"] == 6);
}

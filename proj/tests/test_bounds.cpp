#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "scaling/bounds.hpp"
#include "scaling/errors.hpp"
#include "scaling/rng.hpp"

using namespace scaling;

// Reference values below come from 40-digit mpmath evaluations of the same
// closed forms.

TEST_CASE("entropy bound") {
  CHECK(entropy_bound(2, 2, 7, 3.0) == doctest::Approx(1.921812055672805698).epsilon(1e-14));
  for (const int K : {1, 5, 40}) {
    for (const int d : {1, 10, 100}) {
      CHECK(entropy_bound(K, K, d, 3.0) ==
            doctest::Approx(K * std::log(2.0) * std::log(2.0 * K)).epsilon(1e-14));
    }
  }
  CHECK(entropy_bound(100, 100, 10, 0.1) == doctest::Approx(2724.781750060447822).epsilon(1e-14));
  CHECK_THROWS_AS(entropy_bound(3, 2, 2, 0.0), DomainError);
  CHECK_THROWS_AS(entropy_bound(3, 2, 2, -1.0), DomainError);
  CHECK(entropy_bound(3, 2, 10, 4.0) < 0.0);
}

TEST_CASE("misspecification bound") {
  CHECK(misspec_bound(7, 7, 3, 0.0) == 3.0);
  CHECK(misspec_bound(3, 1, 4, 0.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(misspec_bound(40, 9, 5, 0.0) == doctest::Approx(misspec_bound(4, 9, 5, 0.0) / 10.0).epsilon(1e-15));
}

TEST_CASE("Theorem 2 report") {
  const auto r = bound_theorem2(2, 2, 5, 100, 3.0);
  CHECK(r.form == BoundForm::Theorem2);
  CHECK(r.estimation_nats == doctest::Approx(0.01921812055672805698).epsilon(1e-14));
  CHECK(r.misspecification_nats == doctest::Approx(138.0).epsilon(1e-15));
  CHECK(r.total_nats == r.estimation_nats + r.misspecification_nats);
  CHECK(r.warnings.empty());

  const auto half = bound_theorem2(10, 5, 4, 50, 0.2);
  const auto full = bound_theorem2(10, 5, 4, 100, 0.2);
  CHECK(half.estimation_nats == doctest::Approx(2.0 * full.estimation_nats).epsilon(1e-15));
  CHECK(half.misspecification_nats == full.misspecification_nats);

  const auto far = bound_theorem2(10, 5, 4, 1e300, 0.2);
  CHECK(far.estimation_nats < 1e-290);
  CHECK(far.total_nats == doctest::Approx(3.0 * 5 * (1 + 4 * 0.04) / 10).epsilon(1e-15));

  const auto wide = bound_theorem2(10, 2, 20, 10, 4.0);
  CHECK(wide.estimation_nats < 0.0);
  CHECK(wide.warnings.size() == 1);
}

TEST_CASE("optimal epsilon") {
  CHECK(optimal_epsilon(1, 1, 1) == doctest::Approx(0.2943525056288686727).epsilon(1e-14));
  CHECK(optimal_epsilon(7, 3, 40) == doctest::Approx(optimal_epsilon(7, 3, 10) / 2.0).epsilon(1e-15));
  CHECK(optimal_epsilon(100, 100, 1e6) == doctest::Approx(0.004142114004913628227).epsilon(1e-14));
}

TEST_CASE("Corollary 1 report") {
  const auto r = bound_corollary(100, 100, 10, 1e6);
  CHECK(r.form == BoundForm::Corollary1);
  CHECK(r.misspecification_nats == 3.0);
  CHECK(r.estimation_nats == doctest::Approx(0.008339899449883168637).epsilon(1e-14));
  CHECK(r.warnings.empty());
  for (const int d : {1, 10, 50}) {
    for (const double T : {10.0, 1e4, 1e9}) {
      CHECK(bound_corollary(100, 100, d, T).misspecification_nats == 3.0);
    }
  }
  CHECK(bound_corollary(2, 2, 10, 100).warnings.size() == 1);
  CHECK(bound_corollary(3, 1, 10, 100).warnings.size() == 1);
}

TEST_CASE("bounds decrease in T and the misspecification term in n") {
  for (const double T : {1.0, 10.0, 1e3, 1e6}) {
    CHECK(bound_theorem2(20, 4, 5, 2 * T, 0.1).total_nats < bound_theorem2(20, 4, 5, T, 0.1).total_nats);
    CHECK(bound_corollary(20, 4, 5, 2 * T).total_nats < bound_corollary(20, 4, 5, T).total_nats);
  }
  for (std::int64_t n = 1; n < 1000; n *= 3) {
    CHECK(misspec_bound(n + 1, 4, 5, 0.1) < misspec_bound(n, 4, 5, 0.1));
  }
}

TEST_CASE("corollary dominates the epsilon-minimized Theorem 2 bound") {
  Rng rng(77);
  for (int k = 0; k < 100; ++k) {
    const auto n = static_cast<std::int64_t>(std::round(std::exp(std::log(3.0) + rng.uniform() * std::log(1e4 / 3.0))));
    const int K = static_cast<int>(std::round(std::exp(std::log(2.0) + rng.uniform() * std::log(500.0))));
    const int d = 1 + static_cast<int>(rng.uniform() * 100);
    const double T = std::exp(std::log(1e2) + rng.uniform() * std::log(1e7));
    // Stationary point of the Theorem 2 bound in epsilon: eps^2 = n L / (6T).
    const double L = std::log1p(static_cast<double>(n) / K);
    const double eps = std::sqrt(static_cast<double>(n) * L / (6.0 * T));
    if (eps > 3.0) continue;
    const double best = bound_theorem2(n, K, d, T, eps).total_nats;
    CHECK(best <= bound_theorem2(n, K, d, T, eps * 1.01).total_nats);
    CHECK(best <= bound_theorem2(n, K, d, T, eps / 1.01).total_nats);
    CAPTURE(n);
    CAPTURE(K);
    CAPTURE(d);
    CAPTURE(T);
    CHECK(bound_corollary(n, K, d, T).total_nats >= best);
  }
}

TEST_CASE("report serialization") {
  const auto r = bound_theorem2(4, 2, 3, 10, 0.5);
  const auto j = to_json(r);
  CHECK(j["form"] == "Theorem2");
  CHECK(j["total_nats"].get<double>() == r.total_nats);
  const auto c = bound_corollary(4, 2, 3, 10);
  CHECK(to_json(c)["epsilon"].is_null());
  CHECK(csv_header() == "form,d,K,n,T,epsilon,estimation,misspecification,total");
  CHECK(to_csv_row(c).rfind("Corollary1,3,2,4,10,,", 0) == 0);
}

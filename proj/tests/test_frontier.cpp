#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "scaling/bounds.hpp"
#include "scaling/errors.hpp"
#include "scaling/frontier.hpp"

using namespace scaling;

namespace {

// Corollary bound at fixed budget, written out independently of bounds.cpp.
double budget_formula(double C, int d, int K, double n) {
  const double T = C / (d * n);
  const double L = std::log1p(n / K);
  return d * K * L * (1.0 + std::log(36.0 * T * K) + (2.0 / d) * std::log(2.0 * n)) / (2.0 * T) +
         3.0 * K / n;
}

std::vector<double> log_budgets(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(std::exp(std::log(lo) + i * (std::log(hi) - std::log(lo)) / (count - 1)));
  return out;
}

}  // namespace

TEST_CASE("bound at budget") {
  CHECK(bound_at_budget(1e12, 10, 100, 1000) ==
        doctest::Approx(bound_corollary(1000, 100, 10, 1e8).total_nats).epsilon(1e-14));
  CHECK(bound_at_budget(1e12, 10, 100, 1000) == doctest::Approx(0.3003492480555385870).epsilon(1e-13));
  CHECK(bound_at_budget(2e12, 10, 100, 1000) == doctest::Approx(0.3001787792636383390).epsilon(1e-13));
  CHECK_THROWS_AS(bound_at_budget(1e3, 10, 100, 101), InfeasibleError);
  CHECK_THROWS_AS(bound_at_budget(1e3, 10, 100, 0), InfeasibleError);
  CHECK_NOTHROW(bound_at_budget(1e3, 10, 100, 100));
}

TEST_CASE("bound is U-shaped in width at a fixed budget") {
  const double C = 1e12;
  const auto p = optimal_width(C, 10, 100);
  CHECK(bound_at_budget(C, 10, 100, 1) > p.bound_total_nats);
  CHECK(bound_at_budget(C, 10, 100, static_cast<std::int64_t>(C / 10)) > p.bound_total_nats);
}

TEST_CASE("smallest feasible budget") {
  const auto p = optimal_width(10.0, 10, 100);
  CHECK(p.n_star == 1);
  CHECK(p.T_star == 1.0);
  CHECK_THROWS_AS(optimal_width(9.0, 10, 100), InfeasibleError);
}

TEST_CASE("optimal width matches an exhaustive integer search") {
  const double C = 1e12;
  const int d = 10, K = 100;
  std::int64_t best_n = 1;
  double best = budget_formula(C, d, K, 1.0);
  for (std::int64_t n = 2; n <= 2'000'000; ++n) {
    const double v = budget_formula(C, d, K, static_cast<double>(n));
    if (v < best) {
      best = v;
      best_n = n;
    }
  }
  REQUIRE(best_n < 1'000'000);
  const auto p = optimal_width(C, d, K);
  CHECK(p.n_star == best_n);
  CHECK(p.bound_total_nats == doctest::Approx(best).epsilon(1e-12));
  CHECK(p.T_star == doctest::Approx(C / (d * static_cast<double>(best_n))).epsilon(1e-15));
  CHECK(p.unimodal);

  const auto scan = scan_width(C, d, K);
  CHECK(scan.argmin == best_n);
  CHECK(scan.local_minima == 1);
}

TEST_CASE("frontier stays under the sqrt(3C) envelope") {
  const auto budgets = log_budgets(1e4, 1e16, 25);
  const auto pts = frontier_sweep(budgets, 10, 100);
  REQUIRE(pts.size() == budgets.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].param_count() <= std::sqrt(3.0 * pts[i].C) + 10.0);
    CHECK(pts[i].unimodal);
    if (i > 0) CHECK(pts[i].n_star >= pts[i - 1].n_star);
  }
}

TEST_CASE("sweep preconditions") {
  const std::vector<double> single{1e12};
  CHECK(frontier_sweep(single, 10, 100).size() == 1);
  const std::vector<double> same{1e12, 1e12, 1e12};
  const auto pts = frontier_sweep(same, 10, 100);
  CHECK(pts[0].n_star == pts[2].n_star);
  CHECK_THROWS_AS(slope_estimate(pts, SlopeAxis::Budget), EstimationError);
  const std::vector<double> unsorted{1e12, 1e10};
  CHECK_THROWS_AS(frontier_sweep(unsorted, 10, 100), DomainError);
  CHECK_THROWS_AS(frontier_sweep(std::vector<double>{}, 10, 100), DomainError);
}

TEST_CASE("log-log slope") {
  std::vector<double> x, y;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(std::pow(10.0, i));
    y.push_back(3.0 * std::pow(x.back(), 0.7));
  }
  CHECK(loglog_slope(x, y) == doctest::Approx(0.7).epsilon(1e-9));
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(loglog_slope(two, two), EstimationError);
  const std::vector<double> flat{1.0, 1.0, 1.0};
  const std::vector<double> up{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(loglog_slope(flat, up), EstimationError);
  const std::vector<double> neg{-1.0, 2.0, 3.0};
  CHECK_THROWS_AS(loglog_slope(up, neg), EstimationError);
}

TEST_CASE("frontier slopes over 1e10..1e16") {
  const auto budgets = log_budgets(1e10, 1e16, 13);
  const auto pts = frontier_sweep(budgets, 10, 100);
  const double a = slope_estimate(pts, SlopeAxis::Budget);
  CHECK(a >= 0.45);
  CHECK(a <= 0.55);
  // Parameters scale like C^a and T* like C^(1-a), so the T* slope is a/(1-a).
  const double b = slope_estimate(pts, SlopeAxis::TStar);
  CHECK(b == doctest::Approx(a / (1.0 - a)).epsilon(1e-3));
}

TEST_CASE("frontier csv") {
  const std::vector<double> budgets{1e10, 1e12};
  const auto csv = frontier_csv(frontier_sweep(budgets, 10, 100));
  CHECK(csv.rfind("C,d,K,n_star,T_star,param_count,bound_total\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scaling {

enum class BoundForm { Theorem2, Corollary1 };

// Decomposed error bound, all terms in nats.
struct BoundReport {
  BoundForm form = BoundForm::Theorem2;
  int d = 0;
  int K = 0;
  std::int64_t n = 0;
  double T = 0.0;
  double epsilon = 0.0;  // unused for Corollary1
  double estimation_nats = 0.0;
  double misspecification_nats = 0.0;
  double total_nats = 0.0;
  std::vector<std::string> warnings;
};

// K ln(1 + n/K) (ln(2n) + d ln(3/epsilon)). Negative once epsilon > 3.
double entropy_bound(std::int64_t n, int K, int d, double epsilon);

// 3K(1 + d eps^2)/n.
double misspec_bound(std::int64_t n, int K, int d, double epsilon);

BoundReport bound_theorem2(std::int64_t n, int K, int d, double T, double epsilon);

// Epsilon that turns the Theorem 2 bound into the corollary:
// sqrt(nK ln(1+n/K) / (4T(K+1))).
double optimal_epsilon(std::int64_t n, int K, double T);

// dK ln(1+n/K) (1 + ln(36TK) + (2/d) ln(2n)) / (2T) + 3K/n.
// Stated for n >= 3, K >= 2; smaller values evaluate with a warning.
BoundReport bound_corollary(std::int64_t n, int K, int d, double T);

const char* to_string(BoundForm form);
nlohmann::json to_json(const BoundReport& report);
// form,d,K,n,T,epsilon,estimation,misspecification,total
std::string csv_header();
std::string to_csv_row(const BoundReport& report);

}  // namespace scaling

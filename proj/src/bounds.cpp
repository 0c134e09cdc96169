#include "scaling/bounds.hpp"

#include <cmath>

#include <fmt/format.h>

#include "scaling/errors.hpp"

namespace scaling {

namespace {

void require_positive(std::int64_t n, int K, int d, const char* op) {
  if (n < 1 || K < 1 || d < 1) throw DomainError(fmt::format("{}: n, K and d must be >= 1", op));
}

double log1p_ratio(std::int64_t n, int K) {
  return std::log1p(static_cast<double>(n) / static_cast<double>(K));
}

}  // namespace

double entropy_bound(std::int64_t n, int K, int d, double epsilon) {
  require_positive(n, K, d, "entropy_bound");
  if (!(epsilon > 0.0)) throw DomainError("entropy_bound: epsilon must be > 0");
  return K * log1p_ratio(n, K) *
         (std::log(2.0 * static_cast<double>(n)) + d * std::log(3.0 / epsilon));
}

double misspec_bound(std::int64_t n, int K, int d, double epsilon) {
  require_positive(n, K, d, "misspec_bound");
  return 3.0 * K * (1.0 + d * epsilon * epsilon) / static_cast<double>(n);
}

BoundReport bound_theorem2(std::int64_t n, int K, int d, double T, double epsilon) {
  if (!(T > 0.0)) throw DomainError("bound_theorem2: T must be > 0");
  BoundReport r;
  r.form = BoundForm::Theorem2;
  r.d = d;
  r.K = K;
  r.n = n;
  r.T = T;
  r.epsilon = epsilon;
  r.estimation_nats = entropy_bound(n, K, d, epsilon) / T;
  r.misspecification_nats = misspec_bound(n, K, d, epsilon);
  r.total_nats = r.estimation_nats + r.misspecification_nats;
  if (epsilon > 3.0) {
    r.warnings.push_back(
        fmt::format("epsilon = {} > 3: entropy term ln(3/epsilon) is negative", epsilon));
  }
  return r;
}

double optimal_epsilon(std::int64_t n, int K, double T) {
  if (n < 1 || K < 1 || !(T > 0.0)) throw DomainError("optimal_epsilon: arguments must be > 0");
  return std::sqrt(static_cast<double>(n) * K * log1p_ratio(n, K) / (4.0 * T * (K + 1.0)));
}

BoundReport bound_corollary(std::int64_t n, int K, int d, double T) {
  require_positive(n, K, d, "bound_corollary");
  if (!(T > 0.0)) throw DomainError("bound_corollary: T must be > 0");
  BoundReport r;
  r.form = BoundForm::Corollary1;
  r.d = d;
  r.K = K;
  r.n = n;
  r.T = T;
  const double nd = static_cast<double>(n);
  // ln(e * 36 T K) = 1 + ln(36 T K)
  const double log_term = 1.0 + std::log(36.0 * T * K) + (2.0 / d) * std::log(2.0 * nd);
  r.estimation_nats = d * K * log1p_ratio(n, K) * log_term / (2.0 * T);
  r.misspecification_nats = 3.0 * K / nd;
  r.total_nats = r.estimation_nats + r.misspecification_nats;
  if (n < 3 || K < 2) {
    r.warnings.push_back(fmt::format("corollary stated for n >= 3, K >= 2 (got n = {}, K = {})", n, K));
  }
  return r;
}

const char* to_string(BoundForm form) {
  return form == BoundForm::Theorem2 ? "Theorem2" : "Corollary1";
}

nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json j{{"form", to_string(r.form)},
                   {"d", r.d},
                   {"K", r.K},
                   {"n", r.n},
                   {"T", r.T},
                   {"estimation_nats", r.estimation_nats},
                   {"misspecification_nats", r.misspecification_nats},
                   {"total_nats", r.total_nats},
                   {"warnings", r.warnings}};
  j["epsilon"] = r.form == BoundForm::Theorem2 ? nlohmann::json(r.epsilon) : nlohmann::json(nullptr);
  return j;
}

std::string csv_header() { return "form,d,K,n,T,epsilon,estimation,misspecification,total"; }

std::string to_csv_row(const BoundReport& r) {
  const std::string eps = r.form == BoundForm::Theorem2 ? fmt::format("{:.17g}", r.epsilon) : "";
  return fmt::format("{},{},{},{},{:.17g},{},{:.17g},{:.17g},{:.17g}", to_string(r.form), r.d, r.K,
                     r.n, r.T, eps, r.estimation_nats, r.misspecification_nats, r.total_nats);
}

}  // namespace scaling

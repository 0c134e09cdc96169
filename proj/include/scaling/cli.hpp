#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scaling::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;

// "1e8,1e10,1e12" or "lo:hi:count" (log-spaced, inclusive).
std::vector<double> parse_budgets(const std::string& spec);

// "log:<count>" (log-spaced integers over [1, C/d]) or an explicit
// comma-separated list of widths.
std::vector<std::int64_t> width_grid(const std::string& spec, double C, int d);

// Rows C,d,K,n,T,estimation,misspecification,total,status. Widths that do
// not fit the budget are kept as "infeasible" rows with empty values.
std::string curve_csv(const std::vector<double>& budgets, int d, int K, const std::string& n_grid);

struct VerifyConfig {
  std::uint64_t seed = 42;
  std::uint64_t samples = 200'000;  // per nested Monte Carlo check
  double kl_scale = 1.0;            // > 1 only for the negative control
};

// Runs every lemma check and the exact-Bayes scenarios; "pass" is the
// conjunction of all checks.
nlohmann::json verify_report(const VerifyConfig& config);

// Entry point shared by the executable and the tests. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scaling::cli

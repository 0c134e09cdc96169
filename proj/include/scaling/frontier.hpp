#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace scaling {

// Compute-optimal width for one FLOP budget C = d * n * T.
struct FrontierPoint {
  double C = 0.0;
  int d = 0;
  int K = 0;
  std::int64_t n_star = 0;
  double T_star = 0.0;  // C / (d * n_star), real-valued
  double bound_total_nats = 0.0;
  bool unimodal = true;  // log-grid audit found a single local minimum

  double param_count() const { return static_cast<double>(d) * static_cast<double>(n_star); }
};

// Corollary bound with T = C/(d n). Throws InfeasibleError unless
// 1 <= n <= C/d.
double bound_at_budget(double C, int d, int K, std::int64_t n);

// Result of scanning bound_at_budget over a log-spaced integer grid.
struct WidthScan {
  std::int64_t argmin = 0;
  double min_value = 0.0;
  int local_minima = 0;
};

// Scans `points` log-spaced widths in [1, C/d], then refines around the best
// grid point with an integer search.
WidthScan scan_width(double C, int d, int K, int points = 10'000);

// Golden-section search on ln n (tolerance 1e-6), then the 5 nearest
// integers; ties go to the smaller width. Falls back to scan_width when the
// audit scan is not unimodal. Throws InfeasibleError when C < d.
FrontierPoint optimal_width(double C, int d, int K);

// Budgets must be nonempty and sorted ascending. n_star is checked to be
// nondecreasing along the sweep.
std::vector<FrontierPoint> frontier_sweep(std::span<const double> budgets, int d, int K);

enum class SlopeAxis { TStar, Budget };

// Least-squares slope of ln(d*n_star) against ln(x). Needs >= 3 points with
// strictly increasing x, otherwise EstimationError.
double slope_estimate(std::span<const FrontierPoint> points, SlopeAxis x_axis);
// Same regression on raw values.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// C,d,K,n_star,T_star,param_count,bound_total
std::string frontier_csv(std::span<const FrontierPoint> points);

}  // namespace scaling

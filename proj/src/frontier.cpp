#include "scaling/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "scaling/bounds.hpp"
#include "scaling/errors.hpp"
#include "scaling/parallel.hpp"

namespace scaling {

namespace {

constexpr double kGoldenTolerance = 1e-6;

// Largest feasible width floor(C/d), guarding against C/d landing just below
// an integer through rounding.
std::int64_t max_width(double C, int d) {
  const double ratio = C / d;
  auto n = static_cast<std::int64_t>(std::floor(ratio));
  if (static_cast<double>(n + 1) * d <= C * (1.0 + 1e-12)) ++n;
  return n;
}

// Corollary bound on a continuous width.
double relaxed_bound(double C, int d, int K, double n) {
  const double T = C / (d * n);
  const double log_term = 1.0 + std::log(36.0 * T * K) + (2.0 / d) * std::log(2.0 * n);
  return d * K * std::log1p(n / K) * log_term / (2.0 * T) + 3.0 * K / n;
}

// Integer ternary search for the minimum of a unimodal f on [lo, hi].
template <typename F>
std::int64_t integer_argmin(std::int64_t lo, std::int64_t hi, F&& f) {
  while (hi - lo > 4) {
    const std::int64_t m1 = lo + (hi - lo) / 3;
    const std::int64_t m2 = hi - (hi - lo) / 3;
    if (f(m1) <= f(m2)) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  std::int64_t best = lo;
  double best_value = f(lo);
  for (std::int64_t n = lo + 1; n <= hi; ++n) {
    const double v = f(n);
    if (v < best_value) {
      best = n;
      best_value = v;
    }
  }
  return best;
}

}  // namespace

double bound_at_budget(double C, int d, int K, std::int64_t n) {
  if (!(C > 0.0) || d < 1 || K < 1) throw DomainError("bound_at_budget: C, d, K must be positive");
  if (n < 1 || n > max_width(C, d)) {
    throw InfeasibleError(fmt::format("width {} infeasible for budget C = {:.6g}, d = {}", n, C, d));
  }
  return bound_corollary(n, K, d, C / (static_cast<double>(d) * static_cast<double>(n))).total_nats;
}

WidthScan scan_width(double C, int d, int K, int points) {
  if (C < d) throw InfeasibleError(fmt::format("budget C = {:.6g} < d = {}", C, d));
  const std::int64_t n_max = max_width(C, d);
  const double log_max = std::log(static_cast<double>(n_max));
  std::vector<std::int64_t> grid;
  grid.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double u = points > 1 ? log_max * k / (points - 1) : 0.0;
    const auto n = std::clamp<std::int64_t>(std::llround(std::exp(u)), 1, n_max);
    if (grid.empty() || n != grid.back()) grid.push_back(n);
  }
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = bound_at_budget(C, d, K, grid[i]);

  WidthScan scan;
  std::size_t best = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool left = i == 0 || values[i] < values[i - 1];
    const bool right = i + 1 == values.size() || values[i] <= values[i + 1];
    if (left && right) ++scan.local_minima;
    if (values[i] < values[best]) best = i;
  }
  const std::int64_t lo = best == 0 ? grid[0] : grid[best - 1];
  const std::int64_t hi = best + 1 == grid.size() ? grid[best] : grid[best + 1];
  scan.argmin = integer_argmin(lo, hi, [&](std::int64_t n) { return bound_at_budget(C, d, K, n); });
  scan.min_value = bound_at_budget(C, d, K, scan.argmin);
  return scan;
}

FrontierPoint optimal_width(double C, int d, int K) {
  if (d < 1 || K < 1) throw DomainError("optimal_width: d and K must be >= 1");
  if (!(C >= d)) throw InfeasibleError(fmt::format("budget C = {:.6g} < d = {}", C, d));
  const std::int64_t n_max = max_width(C, d);

  // Golden-section search on u = ln n over the continuous relaxation.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0;
  double b = std::log(static_cast<double>(n_max));
  auto g = [&](double u) { return relaxed_bound(C, d, K, std::exp(u)); };
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double g1 = g(x1);
  double g2 = g(x2);
  while (b - a > kGoldenTolerance) {
    if (g1 <= g2) {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - inv_phi * (b - a);
      g1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + inv_phi * (b - a);
      g2 = g(x2);
    }
  }
  const auto centre = std::llround(std::exp(0.5 * (a + b)));
  std::int64_t n_best = 0;
  double v_best = std::numeric_limits<double>::infinity();
  for (std::int64_t n = centre - 2; n <= centre + 2; ++n) {
    if (n < 1 || n > n_max) continue;
    const double v = bound_at_budget(C, d, K, n);
    if (v < v_best) {
      n_best = n;
      v_best = v;
    }
  }

  FrontierPoint p;
  p.C = C;
  p.d = d;
  p.K = K;
  const WidthScan audit = scan_width(C, d, K);
  p.unimodal = audit.local_minima == 1;
  if (!p.unimodal && (audit.min_value < v_best || (audit.min_value == v_best && audit.argmin < n_best))) {
    fmt::print(stderr, "warning: bound at C = {:.6g} has {} local minima; using grid scan\n", C,
               audit.local_minima);
    n_best = audit.argmin;
    v_best = audit.min_value;
  }
  p.n_star = n_best;
  p.T_star = C / (static_cast<double>(d) * static_cast<double>(n_best));
  p.bound_total_nats = v_best;
  return p;
}

std::vector<FrontierPoint> frontier_sweep(std::span<const double> budgets, int d, int K) {
  if (budgets.empty()) throw DomainError("frontier_sweep: no budgets");
  if (!std::is_sorted(budgets.begin(), budgets.end())) {
    throw DomainError("frontier_sweep: budgets must be sorted ascending");
  }
  std::vector<FrontierPoint> points(budgets.size());
  parallel_for(budgets.size(), [&](std::size_t i) { points[i] = optimal_width(budgets[i], d, K); });
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].n_star < points[i - 1].n_star) {
      throw Error(fmt::format("frontier_sweep: n* decreased from {} to {} between C = {:.6g} and {:.6g}",
                              points[i - 1].n_star, points[i].n_star, budgets[i - 1], budgets[i]));
    }
  }
  return points;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw EstimationError("slope: x and y lengths differ");
  if (x.size() < 3) throw EstimationError("slope: need at least 3 points");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw EstimationError("slope: values must be positive");
    if (i > 0 && !(x[i] > x[i - 1])) {
      throw EstimationError("slope: x must be strictly increasing (degenerate x-range)");
    }
  }
  const double m = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= m;
  my /= m;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (!(sxx > 0.0)) throw EstimationError("slope: degenerate x-range");
  return sxy / sxx;
}

double slope_estimate(std::span<const FrontierPoint> points, SlopeAxis x_axis) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : points) {
    x.push_back(x_axis == SlopeAxis::TStar ? p.T_star : p.C);
    y.push_back(p.param_count());
  }
  return loglog_slope(x, y);
}

std::string frontier_csv(std::span<const FrontierPoint> points) {
  std::string out = "C,d,K,n_star,T_star,param_count,bound_total\n";
  for (const auto& p : points) {
    out += fmt::format("{:.17g},{},{},{},{:.17g},{:.17g},{:.17g}\n", p.C, p.d, p.K, p.n_star,
                       p.T_star, p.param_count(), p.bound_total_nats);
  }
  return out;
}

}  // namespace scaling

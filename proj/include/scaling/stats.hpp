#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace scaling {

// Monte Carlo result.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // standard error of `mean`
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

// Pairwise (cascade) summation; order-stable for a given input order.
double pairwise_sum(std::span<const double> values);

// Estimate from equally weighted group means: the mean of the groups and the
// standard error sd(group means)/sqrt(groups). With nested sampling this
// accounts for both the outer and inner variance. `samples` is recorded as
// given.
McEstimate estimate_from_groups(std::span<const double> group_means, std::uint64_t samples,
                                std::uint64_t seed);

// Plain iid estimate: sample sd / sqrt(n).
McEstimate estimate_from_samples(std::span<const double> values, std::uint64_t seed);

}  // namespace scaling

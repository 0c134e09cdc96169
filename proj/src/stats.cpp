#include "scaling/stats.hpp"

#include <cmath>

namespace scaling {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

McEstimate estimate_from_samples(std::span<const double> values, std::uint64_t seed) {
  McEstimate est;
  est.samples = values.size();
  est.seed = seed;
  if (values.empty()) return est;
  const double n = static_cast<double>(values.size());
  est.mean = pairwise_sum(values) / n;
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double c = values[i] - est.mean;
      sq[i] = c * c;
    }
    est.std_error = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return est;
}

McEstimate estimate_from_groups(std::span<const double> group_means, std::uint64_t samples,
                                std::uint64_t seed) {
  McEstimate est = estimate_from_samples(group_means, seed);
  est.samples = samples;
  return est;
}

}  // namespace scaling

#include "scaling/rng.hpp"

#include <cmath>

namespace scaling {

namespace {

std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), 0x5ca1e5u};
  engine_.seed(seq);
}

double Rng::uniform() { return unit_(engine_); }

double Rng::normal() { return normal_(engine_); }

bool Rng::coin() { return (engine_() >> 63) != 0; }

double Rng::beta_one(double b) {
  // 1 - V ~ Beta(b, 1) has CDF x^b.
  const double u = uniform();
  return -std::expm1(std::log1p(-u) / b);
}

double Rng::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

std::uint64_t Rng::next_seed() { return engine_(); }

}  // namespace scaling

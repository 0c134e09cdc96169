#pragma once

#include <cstdint>
#include <random>

namespace scaling {

// Seeded random source. All sampling in the library goes through this type so
// that results are a pure function of (seed, stream).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  // Independent substream for parallel work item `stream` under `seed`.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream); }

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  bool coin();       // fair
  // Beta(1, b) by inversion.
  double beta_one(double b);
  double gamma(double shape);
  // Fresh 64-bit value, used to seed nested work.
  std::uint64_t next_seed();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace scaling

#pragma once

#include <cstdint>
#include <random>

#include "sintheta/linalg.hpp"

namespace sintheta {

/// splitmix64 output function; the basis of all stream derivation.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-split substream seed: derive_seed(s, i) and derive_seed(s, j) are
/// decorrelated for i != j, and adding streams never perturbs earlier ones.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(base + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

/// One worker-owned random stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal(double sigma = 1.0) {
    std::normal_distribution<double> dist(0.0, sigma);
    return dist(engine_);
  }

  double uniform() {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(engine_);
  }

  Matrix gaussian(Index rows, Index cols, double sigma = 1.0);

  /// Random +-1 signs.
  Vector rademacher(Index size);

  /// Haar-distributed orthogonal matrix (QR of a Gaussian block with the R
  /// diagonal signs folded in).
  Matrix haar_orthogonal(Index dim);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sintheta

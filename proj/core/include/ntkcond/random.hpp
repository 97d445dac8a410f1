#ifndef NTKCOND_RANDOM_HPP
#define NTKCOND_RANDOM_HPP

#include <cstdint>
#include <random>

#include "ntkcond/types.hpp"

namespace ntkcond {

// Seeded generator shared by every stochastic routine. Streams are
// reproducible bit-for-bit on one platform/standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double sign() { return (engine_() & 1u) ? 1.0 : -1.0; }
  Index index(Index n);

  Vector normal_vector(Index m);
  Vector unit_vector(Index m);
  /// Uniform sample from the closed Euclidean ball B(center, radius):
  /// direction uniform on the sphere, radius scaled by u^{1/m}.
  Vector in_ball(const Vector& center, double radius);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Derive an independent child seed (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ntkcond

#endif  // NTKCOND_RANDOM_HPP

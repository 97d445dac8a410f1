#include "ntkcond/random.hpp"

#include <cmath>

namespace ntkcond {

Index Rng::index(Index n) {
  require(n > 0, "Rng::index: empty range");
  std::uniform_int_distribution<Index> dist(0, n - 1);
  return dist(engine_);
}

Vector Rng::normal_vector(Index m) {
  Vector v(m);
  for (Index i = 0; i < m; ++i) v[i] = normal();
  return v;
}

Vector Rng::unit_vector(Index m) {
  require(m > 0, "Rng::unit_vector: dimension must be positive");
  Vector v = normal_vector(m);
  double norm = v.norm();
  while (norm == 0.0) {
    v = normal_vector(m);
    norm = v.norm();
  }
  return v / norm;
}

Vector Rng::in_ball(const Vector& center, double radius) {
  const Index m = center.size();
  Vector direction = unit_vector(m);
  const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(m));
  return center + r * direction;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace ntkcond

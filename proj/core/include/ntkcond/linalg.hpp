#ifndef NTKCOND_LINALG_HPP
#define NTKCOND_LINALG_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "ntkcond/types.hpp"

namespace ntkcond::linalg {

/// Matrix-free symmetric operator u -> A u.
using Operator = std::function<Vector(const Vector&)>;

struct Extremes {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  Vector min_vector;
  Vector max_vector;
  std::string method;  // "dense" | "lanczos"
  Index iterations = 0;
  bool converged = true;
  double residual = 0.0;
};

struct PowerResult {
  double value = 0.0;
  Vector vector;
  Index iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

struct IterationControl {
  double tolerance = 1e-8;
  Index max_iterations = 1000;
  std::uint64_t seed = 0;
};

/// Extreme eigenpairs of a symmetric matrix: dense solve when n <= dense_limit,
/// Lanczos otherwise.
Extremes symmetric_extremes(const Matrix& a, Index dense_limit = 512);

/// Lanczos with full reorthogonalisation. Stops when both extreme Ritz pairs
/// have residual <= tolerance * max|theta| or the Krylov space is exhausted.
/// max_iterations <= 0 means 10 n; hitting the cap sets converged = false.
Extremes lanczos(const Operator& op, Index n, double tolerance = 1e-8, Index max_iterations = 0,
                 std::uint64_t seed = 0, const Vector* start = nullptr);

/// Power iteration for the dominant eigenvalue of a symmetric operator;
/// stops when successive Rayleigh quotients agree to tolerance (relative).
PowerResult power_iteration(const Operator& op, Index n, const IterationControl& control,
                            const Vector* start = nullptr);

/// ||A||_2 of a symmetric, possibly indefinite operator by power iteration on
/// A^2 (two applications per step).
PowerResult squared_power_norm(const Operator& op, Index n, const IterationControl& control,
                               const Vector* start = nullptr);

/// Largest eigenvalue (not largest magnitude). If the dominant eigenvalue is
/// negative, a second pass on A - theta I recovers lambda_max.
PowerResult largest_eigenvalue(const Operator& op, Index n, const IterationControl& control);

/// Smallest eigenvalue by power iteration on c I - A with c = upper + margin.
PowerResult smallest_eigenvalue_shifted(const Operator& op, Index n, double upper, double margin,
                                        const IterationControl& control,
                                        const Vector* start = nullptr);

/// Largest singular value of a general matrix (dense SVD).
double spectral_norm(const Matrix& a);

/// Largest singular value by power iteration on A^T A.
PowerResult spectral_norm_power(const Matrix& a, const IterationControl& control);

}  // namespace ntkcond::linalg

#endif  // NTKCOND_LINALG_HPP

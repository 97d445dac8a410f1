#include "ntkcond/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ntkcond/random.hpp"

namespace ntkcond::linalg {
namespace {

Vector start_vector(Index n, std::uint64_t seed, const Vector* start) {
  if (start != nullptr && start->size() == n && start->norm() > 0.0) return start->normalized();
  Rng rng(seed);
  return rng.unit_vector(n);
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)) ||
         std::abs(a - b) <= 1e-300;
}

}  // namespace

Extremes symmetric_extremes(const Matrix& a, Index dense_limit) {
  require(a.rows() == a.cols(), "symmetric_extremes: matrix must be square");
  require(a.rows() > 0, "symmetric_extremes: empty matrix");
  const Index n = a.rows();
  if (n <= dense_limit) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    Extremes e;
    e.lambda_min = solver.eigenvalues()(0);
    e.lambda_max = solver.eigenvalues()(n - 1);
    e.min_vector = solver.eigenvectors().col(0);
    e.max_vector = solver.eigenvectors().col(n - 1);
    e.method = "dense";
    return e;
  }
  return lanczos([&a](const Vector& v) -> Vector { return a * v; }, n);
}

Extremes lanczos(const Operator& op, Index n, double tolerance, Index max_iterations,
                 std::uint64_t seed, const Vector* start) {
  require(n > 0, "lanczos: dimension must be positive");
  if (max_iterations <= 0) max_iterations = 10 * n;
  const Index cap = std::min(max_iterations, n);

  Matrix q(n, cap);
  std::vector<double> alpha;
  std::vector<double> beta;
  q.col(0) = start_vector(n, seed, start);

  Extremes out;
  out.method = "lanczos";
  out.converged = false;
  Eigen::SelfAdjointEigenSolver<Matrix> tri;
  for (Index k = 0; k < cap; ++k) {
    Vector v = op(q.col(k));
    const double a = q.col(k).dot(v);
    alpha.push_back(a);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const Vector coeffs = q.leftCols(k + 1).transpose() * v;
      v.noalias() -= q.leftCols(k + 1) * coeffs;
    }
    const double b = v.norm();

    const Index dim = k + 1;
    Vector diag(dim);
    Vector sub(std::max<Index>(dim - 1, 0));
    for (Index i = 0; i < dim; ++i) diag(i) = alpha[static_cast<std::size_t>(i)];
    for (Index i = 0; i + 1 < dim; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double theta_min = tri.eigenvalues()(0);
    const double theta_max = tri.eigenvalues()(dim - 1);
    const double res_min = std::abs(b * tri.eigenvectors()(dim - 1, 0));
    const double res_max = std::abs(b * tri.eigenvectors()(dim - 1, dim - 1));
    const double scale = std::max({std::abs(theta_min), std::abs(theta_max), 1e-300});
    out.iterations = dim;
    out.lambda_min = theta_min;
    out.lambda_max = theta_max;
    out.residual = std::max(res_min, res_max);

    const bool exhausted = (dim == n) || b <= 1e-14 * scale;
    if (out.residual <= tolerance * scale || exhausted) {
      out.converged = true;
      break;
    }
    if (k + 1 < cap) {
      beta.push_back(b);
      q.col(k + 1) = v / b;
    }
  }
  const Index dim = out.iterations;
  out.min_vector = (q.leftCols(dim) * tri.eigenvectors().col(0)).normalized();
  out.max_vector = (q.leftCols(dim) * tri.eigenvectors().col(dim - 1)).normalized();
  return out;
}

PowerResult power_iteration(const Operator& op, Index n, const IterationControl& control,
                            const Vector* start) {
  PowerResult r;
  Vector v = start_vector(n, control.seed, start);
  double previous = 0.0;
  for (Index it = 1; it <= control.max_iterations; ++it) {
    const Vector av = op(v);
    const double rq = v.dot(av);
    r.iterations = it;
    r.value = rq;
    r.residual = (av - rq * v).norm();
    const double norm = av.norm();
    if (norm == 0.0) {
      r.vector = v;
      r.converged = true;
      r.value = 0.0;
      return r;
    }
    if (it > 1 && close(rq, previous, control.tolerance)) {
      r.vector = v;
      r.converged = true;
      return r;
    }
    previous = rq;
    v = av / norm;
  }
  r.vector = v;
  return r;
}

PowerResult squared_power_norm(const Operator& op, Index n, const IterationControl& control,
                               const Vector* start) {
  PowerResult r = power_iteration([&op](const Vector& u) { return op(op(u)); }, n, control, start);
  r.value = std::sqrt(std::max(r.value, 0.0));
  return r;
}

PowerResult largest_eigenvalue(const Operator& op, Index n, const IterationControl& control) {
  PowerResult first = power_iteration(op, n, control);
  if (first.value >= 0.0) return first;
  const double shift = first.value;
  PowerResult second = power_iteration(
      [&op, shift](const Vector& u) -> Vector { return op(u) - shift * u; }, n, control);
  second.value += shift;
  second.iterations += first.iterations;
  return second;
}

PowerResult smallest_eigenvalue_shifted(const Operator& op, Index n, double upper, double margin,
                                        const IterationControl& control, const Vector* start) {
  const double c = upper + margin;
  PowerResult r = power_iteration(
      [&op, c](const Vector& u) -> Vector { return c * u - op(u); }, n, control, start);
  r.value = c - r.value;
  return r;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

PowerResult spectral_norm_power(const Matrix& a, const IterationControl& control) {
  PowerResult r = power_iteration(
      [&a](const Vector& u) -> Vector { return a.transpose() * (a * u); }, a.cols(), control);
  r.value = std::sqrt(std::max(r.value, 0.0));
  return r;
}

}  // namespace ntkcond::linalg

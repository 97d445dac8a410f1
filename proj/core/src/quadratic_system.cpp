#include "ntkcond/quadratic_system.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "ntkcond/random.hpp"

namespace ntkcond {
namespace {

double symmetric_spectral_norm(const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(b, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

QuadraticSystem::QuadraticSystem(std::vector<Matrix> hessians) : b_(std::move(hessians)) {
  require(!b_.empty(), "QuadraticSystem: need at least one output");
  m_ = b_.front().rows();
  require(m_ > 0, "QuadraticSystem: empty Hessian");
  for (auto& b : b_) {
    require(b.rows() == m_ && b.cols() == m_, "QuadraticSystem: Hessians must be m x m");
    require((b - b.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + b.cwiseAbs().maxCoeff()),
            "QuadraticSystem: Hessians must be symmetric");
    b = 0.5 * (b + b.transpose()).eval();
  }
}

QuadraticSystem QuadraticSystem::random(Index n, Index m, double scale, std::uint64_t seed) {
  require(n > 0 && m > 0, "QuadraticSystem::random: dimensions must be positive");
  Rng rng(seed);
  std::vector<Matrix> bs;
  bs.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Matrix g(m, m);
    for (Index c = 0; c < m; ++c)
      for (Index r = 0; r < m; ++r) g(r, c) = rng.normal();
    bs.push_back(scale * 0.5 * (g + g.transpose()));
  }
  return QuadraticSystem(std::move(bs));
}

QuadraticSystem QuadraticSystem::bilinear_product() {
  Matrix b(2, 2);
  b << 0.0, 1.0, 1.0, 0.0;
  return QuadraticSystem({b});
}

Vector QuadraticSystem::evaluate(const Vector& w) const {
  Vector f(num_outputs());
  for (Index i = 0; i < num_outputs(); ++i) f[i] = 0.5 * w.dot(b_[static_cast<std::size_t>(i)] * w);
  return f;
}

Matrix QuadraticSystem::jacobian(const Vector& w) const {
  Matrix j(num_outputs(), m_);
  for (Index i = 0; i < num_outputs(); ++i) j.row(i) = (b_[static_cast<std::size_t>(i)] * w).transpose();
  return j;
}

Vector QuadraticSystem::output_hvp(const Vector&, Index i, const Vector& u) const {
  return b_[static_cast<std::size_t>(i)] * u;
}

double QuadraticSystem::hessian_tensor_norm() const {
  double norm = 0.0;
  for (const auto& b : b_) norm = std::max(norm, symmetric_spectral_norm(b));
  return norm;
}

double QuadraticSystem::lipschitz_bound(const Vector& center, double radius) const {
  const Matrix j0 = jacobian(center);
  Eigen::JacobiSVD<Matrix> svd(j0);
  double sum_sq = 0.0;
  for (const auto& b : b_) {
    const double s = symmetric_spectral_norm(b);
    sum_sq += s * s;
  }
  // ||J(w) - J(w0)||_2 <= ||J(w) - J(w0)||_F <= sqrt(sum ||B_i||^2) ||w - w0||.
  return svd.singularValues()[0] + std::sqrt(sum_sq) * radius;
}

}  // namespace ntkcond

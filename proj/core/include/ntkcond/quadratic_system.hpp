#ifndef NTKCOND_QUADRATIC_SYSTEM_HPP
#define NTKCOND_QUADRATIC_SYSTEM_HPP

#include <cstdint>
#include <vector>

#include "ntkcond/system.hpp"

namespace ntkcond {

/// F_i(w) = 1/2 w^T B_i w with symmetric B_i, so grad F_i = B_i w and H_i = B_i.
/// The product map F(w) = w_1 w_2 is the m = 2, B = [[0,1],[1,0]] member.
class QuadraticSystem final : public System {
 public:
  explicit QuadraticSystem(std::vector<Matrix> hessians);

  /// B_i = scale * (G + G^T) / 2 with G standard normal.
  static QuadraticSystem random(Index n, Index m, double scale, std::uint64_t seed);
  static QuadraticSystem bilinear_product();

  Index num_params() const override { return m_; }
  Index num_outputs() const override { return static_cast<Index>(b_.size()); }
  std::string name() const override { return "quadratic"; }

  Vector evaluate(const Vector& w) const override;
  Matrix jacobian(const Vector& w) const override;
  Vector output_hvp(const Vector& w, Index i, const Vector& u) const override;
  Vector gradient(const Vector& w, Index i) const override { return b_[static_cast<std::size_t>(i)] * w; }

  const Matrix& hessian(Index i) const { return b_[static_cast<std::size_t>(i)]; }
  /// max_i ||B_i||_2, the exact Hessian-tensor norm (constant in w).
  double hessian_tensor_norm() const;
  /// Rigorous sup of ||J(w)||_2 over B(center, radius):
  /// ||J(w0)||_2 + sqrt(sum_i ||B_i||_2^2) * radius.
  double lipschitz_bound(const Vector& center, double radius) const;

 private:
  std::vector<Matrix> b_;
  Index m_ = 0;
};

}  // namespace ntkcond

#endif  // NTKCOND_QUADRATIC_SYSTEM_HPP

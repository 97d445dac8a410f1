#ifndef NTKCOND_LINEAR_SYSTEM_HPP
#define NTKCOND_LINEAR_SYSTEM_HPP

#include "ntkcond/system.hpp"

namespace ntkcond {

/// F(w) = A w. Constant Jacobian, zero Hessian.
class LinearSystem final : public System {
 public:
  explicit LinearSystem(Matrix a);

  Index num_params() const override { return a_.cols(); }
  Index num_outputs() const override { return a_.rows(); }
  std::string name() const override { return "linear"; }

  Vector evaluate(const Vector& w) const override { return a_ * w; }
  Matrix jacobian(const Vector&) const override { return a_; }
  Vector output_hvp(const Vector&, Index, const Vector&) const override {
    return Vector::Zero(num_params());
  }
  Vector weighted_hvp(const Vector&, const Vector&, const Vector&) const override {
    return Vector::Zero(num_params());
  }
  Vector vjp(const Vector&, const Vector& r) const override { return a_.transpose() * r; }
  std::optional<double> output_hessian_norm(const Vector&, Index) const override { return 0.0; }
  Vector gradient(const Vector&, Index i) const override { return a_.row(i).transpose(); }

  const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
};

}  // namespace ntkcond

#endif  // NTKCOND_LINEAR_SYSTEM_HPP

#ifndef NTKCOND_TRANSFORMED_SYSTEM_HPP
#define NTKCOND_TRANSFORMED_SYSTEM_HPP

#include "ntkcond/activation.hpp"
#include "ntkcond/system.hpp"

namespace ntkcond {

/// Phi(F)(w) with Phi applied elementwise: Phi(F)_i = phi(F_i(w)).
/// Jacobian diag(phi'(F)) J_F; per-output Hessian
/// phi''(F_i) grad F_i grad F_i^T + phi'(F_i) H_i.
class TransformedSystem final : public System {
 public:
  TransformedSystem(SystemPtr base, OutputMap phi);

  Index num_params() const override { return base_->num_params(); }
  Index num_outputs() const override { return base_->num_outputs(); }
  std::string name() const override { return base_->name() + "+" + phi_.name; }

  Vector evaluate(const Vector& w) const override;
  Matrix jacobian(const Vector& w) const override;
  Vector output_hvp(const Vector& w, Index i, const Vector& u) const override;
  Vector weighted_hvp(const Vector& w, const Vector& r, const Vector& u) const override;
  Vector vjp(const Vector& w, const Vector& r) const override;
  Vector gradient(const Vector& w, Index i) const override;

  bool second_order_supported() const override { return base_->second_order_supported(); }
  bool at_nondifferentiable_point(const Vector& w) const override {
    return base_->at_nondifferentiable_point(w);
  }

  const System& base() const { return *base_; }
  const SystemPtr& base_ptr() const { return base_; }
  const OutputMap& output_map() const { return phi_; }

 private:
  SystemPtr base_;
  OutputMap phi_;
};

}  // namespace ntkcond

#endif  // NTKCOND_TRANSFORMED_SYSTEM_HPP

#ifndef NTKCOND_SYSTEM_HPP
#define NTKCOND_SYSTEM_HPP

#include <memory>
#include <optional>
#include <string>

#include "ntkcond/types.hpp"

namespace ntkcond {

/// A differentiable system F: R^m -> R^n with exact first- and second-order
/// actions. Implementations are immutable after construction, so one instance
/// may be shared across threads.
class System {
 public:
  virtual ~System() = default;

  virtual Index num_params() const = 0;
  virtual Index num_outputs() const = 0;
  virtual std::string name() const = 0;

  virtual Vector evaluate(const Vector& w) const = 0;
  /// n x m matrix with rows grad F_i(w).
  virtual Matrix jacobian(const Vector& w) const = 0;
  /// H_i(w) u, the Hessian of the i-th output applied to u.
  virtual Vector output_hvp(const Vector& w, Index i, const Vector& u) const = 0;

  /// sum_i r_i H_i(w) u. The default loops over outputs; models with cheap
  /// fused second-order passes override it.
  virtual Vector weighted_hvp(const Vector& w, const Vector& r, const Vector& u) const;
  /// J(w)^T r.
  virtual Vector vjp(const Vector& w, const Vector& r) const;
  /// grad F_i(w), row i of the Jacobian.
  virtual Vector gradient(const Vector& w, Index i) const;

  /// ||H_i(w)||_2 in closed form when the model's output Hessians have
  /// exploitable structure (block-diagonal, zero); nullopt otherwise.
  virtual std::optional<double> output_hessian_norm(const Vector& /*w*/, Index /*i*/) const {
    return std::nullopt;
  }
  /// False for models whose activations lack a smoothness constant (ReLU).
  virtual bool second_order_supported() const { return true; }
  /// True when w sits on a point where some activation derivative is a
  /// one-sided convention rather than a true derivative.
  virtual bool at_nondifferentiable_point(const Vector& /*w*/) const { return false; }

  /// Throws ContractError unless w has length m and finite entries.
  void check_params(const Vector& w) const;
  /// Throws UnsupportedOperation when second_order_supported() is false.
  void require_second_order() const;
};

using SystemPtr = std::shared_ptr<const System>;

struct JacobianResult {
  Matrix matrix;
  /// Set when a ReLU preactivation was exactly zero and sigma'(0) = 0 was used.
  bool nondifferentiable_point = false;
};

namespace systems {

Vector evaluate(const System& system, const Vector& w);
JacobianResult jacobian(const System& system, const Vector& w);
Vector hvp_per_output(const System& system, const Vector& w, Index i, const Vector& u);

/// H_L(w) u for L = 1/2 ||F - y||^2 given the residual r = F(w) - y:
/// J^T J u + sum_i r_i H_i u.
Vector weighted_loss_hvp(const System& system, const Vector& w, const Vector& r, const Vector& u);

double square_loss(const System& system, const Vector& w, const Vector& targets);

}  // namespace systems

/// The loss Hessian H_L at a fixed point with J and the residual cached, for
/// repeated products inside iterative eigensolvers.
class LossHessianOperator {
 public:
  LossHessianOperator(const System& system, const Vector& w, const Vector& targets);

  Vector apply(const Vector& u) const;
  Index dim() const { return w_.size(); }
  const Matrix& jacobian() const { return jacobian_; }
  const Vector& residual() const { return residual_; }

  /// Dense m x m matrix assembled column by column from apply().
  Matrix dense() const;

 private:
  const System& system_;
  Vector w_;
  Matrix jacobian_;
  Vector residual_;
};

}  // namespace ntkcond

#endif  // NTKCOND_SYSTEM_HPP

#include "ntkcond/system.hpp"

#include <string>

namespace ntkcond {

Vector System::weighted_hvp(const Vector& w, const Vector& r, const Vector& u) const {
  Vector out = Vector::Zero(num_params());
  for (Index i = 0; i < num_outputs(); ++i) {
    if (r[i] != 0.0) out.noalias() += r[i] * output_hvp(w, i, u);
  }
  return out;
}

Vector System::vjp(const Vector& w, const Vector& r) const {
  return jacobian(w).transpose() * r;
}

Vector System::gradient(const Vector& w, Index i) const { return jacobian(w).row(i).transpose(); }

void System::check_params(const Vector& w) const {
  if (w.size() != num_params()) {
    throw ContractError(name() + ": parameter vector has length " + std::to_string(w.size()) +
                        ", expected " + std::to_string(num_params()));
  }
  if (!w.allFinite()) throw ContractError(name() + ": parameter vector has non-finite entries");
}

void System::require_second_order() const {
  if (!second_order_supported()) {
    throw UnsupportedOperation(name() +
                               ": second-order operations need a beta-smooth activation "
                               "(ReLU has no smoothness constant)");
  }
}

namespace systems {

Vector evaluate(const System& system, const Vector& w) {
  system.check_params(w);
  return system.evaluate(w);
}

JacobianResult jacobian(const System& system, const Vector& w) {
  system.check_params(w);
  return JacobianResult{system.jacobian(w), system.at_nondifferentiable_point(w)};
}

Vector hvp_per_output(const System& system, const Vector& w, Index i, const Vector& u) {
  system.check_params(w);
  system.require_second_order();
  require(i >= 0 && i < system.num_outputs(), "hvp_per_output: output index out of range");
  require(u.size() == system.num_params(), "hvp_per_output: direction has wrong length");
  return system.output_hvp(w, i, u);
}

Vector weighted_loss_hvp(const System& system, const Vector& w, const Vector& r, const Vector& u) {
  system.check_params(w);
  system.require_second_order();
  require(r.size() == system.num_outputs(), "weighted_loss_hvp: residual has wrong length");
  require(u.size() == system.num_params(), "weighted_loss_hvp: direction has wrong length");
  const Matrix j = system.jacobian(w);
  Vector out = j.transpose() * (j * u);
  out += system.weighted_hvp(w, r, u);
  return out;
}

double square_loss(const System& system, const Vector& w, const Vector& targets) {
  require(targets.size() == system.num_outputs(), "square_loss: targets have wrong length");
  return 0.5 * (system.evaluate(w) - targets).squaredNorm();
}

}  // namespace systems

LossHessianOperator::LossHessianOperator(const System& system, const Vector& w,
                                         const Vector& targets)
    : system_(system), w_(w) {
  system.check_params(w);
  system.require_second_order();
  require(targets.size() == system.num_outputs(), "LossHessianOperator: targets have wrong length");
  jacobian_ = system.jacobian(w);
  residual_ = system.evaluate(w) - targets;
}

Vector LossHessianOperator::apply(const Vector& u) const {
  Vector out = jacobian_.transpose() * (jacobian_ * u);
  out += system_.weighted_hvp(w_, residual_, u);
  return out;
}

Matrix LossHessianOperator::dense() const {
  const Index m = dim();
  Matrix h(m, m);
  Vector e = Vector::Zero(m);
  for (Index j = 0; j < m; ++j) {
    e[j] = 1.0;
    h.col(j) = apply(e);
    e[j] = 0.0;
  }
  return 0.5 * (h + h.transpose());
}

}  // namespace ntkcond

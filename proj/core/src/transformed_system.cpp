#include "ntkcond/transformed_system.hpp"

namespace ntkcond {

TransformedSystem::TransformedSystem(SystemPtr base, OutputMap phi)
    : base_(std::move(base)), phi_(std::move(phi)) {
  require(base_ != nullptr, "TransformedSystem: base system is null");
  require(static_cast<bool>(phi_.value) && static_cast<bool>(phi_.first) &&
              static_cast<bool>(phi_.second),
          "TransformedSystem: output map needs value and two derivatives");
}

Vector TransformedSystem::evaluate(const Vector& w) const {
  return base_->evaluate(w).unaryExpr([this](double z) { return phi_.value(z); });
}

Matrix TransformedSystem::jacobian(const Vector& w) const {
  const Vector f = base_->evaluate(w);
  const Vector d1 = f.unaryExpr([this](double z) { return phi_.first(z); });
  return d1.asDiagonal() * base_->jacobian(w);
}

Vector TransformedSystem::gradient(const Vector& w, Index i) const {
  const Vector f = base_->evaluate(w);
  return phi_.first(f[i]) * base_->gradient(w, i);
}

Vector TransformedSystem::vjp(const Vector& w, const Vector& r) const {
  const Vector f = base_->evaluate(w);
  const Vector d1 = f.unaryExpr([this](double z) { return phi_.first(z); });
  return base_->vjp(w, r.cwiseProduct(d1));
}

Vector TransformedSystem::output_hvp(const Vector& w, Index i, const Vector& u) const {
  const double fi = base_->evaluate(w)[i];
  const Vector g = base_->gradient(w, i);
  Vector out = phi_.second(fi) * g.dot(u) * g;
  out += phi_.first(fi) * base_->output_hvp(w, i, u);
  return out;
}

Vector TransformedSystem::weighted_hvp(const Vector& w, const Vector& r, const Vector& u) const {
  const Vector f = base_->evaluate(w);
  const Vector d1 = f.unaryExpr([this](double z) { return phi_.first(z); });
  const Vector d2 = f.unaryExpr([this](double z) { return phi_.second(z); });
  const Matrix j = base_->jacobian(w);
  Vector out = j.transpose() * r.cwiseProduct(d2).cwiseProduct(j * u);
  out += base_->weighted_hvp(w, r.cwiseProduct(d1), u);
  return out;
}

}  // namespace ntkcond

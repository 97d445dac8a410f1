#include "ntkcond/shallow_net.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "ntkcond/random.hpp"

namespace ntkcond {

ShallowNet::ShallowNet(ShallowNetSpec spec, std::vector<double> inputs, Vector output_signs)
    : spec_(spec), inputs_(std::move(inputs)), signs_(std::move(output_signs)) {
  require(spec_.width >= 1, "ShallowNet: width must be positive");
  require(!inputs_.empty(), "ShallowNet: need at least one input");
  if (spec_.parameterization == ShallowParameterization::kHiddenOnly) {
    require(signs_.size() == spec_.width, "ShallowNet: output signs must have length m");
  } else {
    signs_.resize(0);
  }
  scale_ = 1.0 / std::sqrt(static_cast<double>(spec_.width));
}

ShallowInit ShallowNet::gaussian_init(const ShallowNetSpec& spec, std::uint64_t seed) {
  require(spec.width >= 1, "ShallowNet::gaussian_init: width must be positive");
  const Index m = spec.width;
  Rng rng(seed);
  ShallowInit init;
  Vector w = rng.normal_vector(m);
  init.output_signs.resize(m);
  for (Index j = 0; j < m; ++j) init.output_signs[j] = rng.sign();
  if (spec.parameterization == ShallowParameterization::kHiddenOnly) {
    init.params = std::move(w);
  } else {
    init.params.resize(3 * m);
    init.params.segment(0, m) = w;
    init.params.segment(m, m) = init.output_signs;
    init.params.segment(2 * m, m) = rng.normal_vector(m);
  }
  return init;
}

Index ShallowNet::num_params() const {
  return spec_.parameterization == ShallowParameterization::kFull ? 3 * spec_.width : spec_.width;
}

ShallowNet::Unit ShallowNet::unit(const Vector& p, Index j) const {
  if (spec_.parameterization == ShallowParameterization::kFull) {
    const Index m = spec_.width;
    return Unit{p[j], p[m + j], p[2 * m + j]};
  }
  return Unit{p[j], signs_[j], 0.0};
}

namespace {
// Inputs are processed in blocks so the units-by-inputs arrays stay small.
constexpr Index kInputBlock = 64;
}  // namespace

Eigen::ArrayXXd ShallowNet::preactivations(const Vector& w, Index first, Index count) const {
  const Index m = spec_.width;
  Eigen::Map<const Eigen::ArrayXd> x(inputs_.data() + first, count);
  Eigen::ArrayXXd z = w.head(m).array().matrix() * x.matrix().transpose();
  if (spec_.parameterization == ShallowParameterization::kFull) z.colwise() += w.segment(2 * m, m).array();
  return z;
}

Eigen::ArrayXd ShallowNet::output_weights(const Vector& w) const {
  if (spec_.parameterization == ShallowParameterization::kFull) return w.segment(spec_.width, spec_.width).array();
  return signs_.array();
}

Vector ShallowNet::evaluate(const Vector& w) const {
  const Eigen::ArrayXd v = output_weights(w);
  Vector f(num_outputs());
  Eigen::ArrayXXd s;
  for (Index i0 = 0; i0 < num_outputs(); i0 += kInputBlock) {
    const Index k = std::min(kInputBlock, num_outputs() - i0);
    spec_.activation.apply(preactivations(w, i0, k), &s, nullptr);
    f.segment(i0, k) = scale_ * (s.matrix().transpose() * v.matrix());
  }
  return f;
}

Vector ShallowNet::gradient_for_input(const Vector& w, double x) const {
  const Index m = spec_.width;
  const auto& act = spec_.activation;
  Vector g(num_params());
  const bool full = spec_.parameterization == ShallowParameterization::kFull;
  for (Index j = 0; j < m; ++j) {
    const Unit u = unit(w, j);
    const double z = u.weight * x + u.bias;
    const double d1 = act.first(z);
    g[j] = scale_ * u.sign * d1 * x;
    if (full) {
      g[m + j] = scale_ * act.value(z);
      g[2 * m + j] = scale_ * u.sign * d1;
    }
  }
  return g;
}

Vector ShallowNet::gradient(const Vector& w, Index i) const {
  return gradient_for_input(w, inputs_[static_cast<std::size_t>(i)]);
}

Matrix ShallowNet::jacobian(const Vector& w) const {
  const Index m = spec_.width;
  const bool full = spec_.parameterization == ShallowParameterization::kFull;
  const Eigen::ArrayXd v = output_weights(w);
  Matrix j(num_outputs(), num_params());
  Eigen::ArrayXXd s, d;
  for (Index i0 = 0; i0 < num_outputs(); i0 += kInputBlock) {
    const Index k = std::min(kInputBlock, num_outputs() - i0);
    Eigen::Map<const Eigen::ArrayXd> x(inputs_.data() + i0, k);
    spec_.activation.apply(preactivations(w, i0, k), full ? &s : nullptr, &d);
    d.colwise() *= scale_ * v;  // d/db
    j.block(i0, 0, k, m) = (d.rowwise() * x.transpose()).matrix().transpose();
    if (full) {
      j.block(i0, m, k, m) = scale_ * s.matrix().transpose();
      j.block(i0, 2 * m, k, m) = d.matrix().transpose();
    }
  }
  return j;
}

Vector ShallowNet::vjp(const Vector& w, const Vector& r) const {
  const Index m = spec_.width;
  const bool full = spec_.parameterization == ShallowParameterization::kFull;
  const Eigen::ArrayXd v = output_weights(w);
  Vector g = Vector::Zero(num_params());
  Eigen::ArrayXXd s, d;
  for (Index i0 = 0; i0 < num_outputs(); i0 += kInputBlock) {
    const Index k = std::min(kInputBlock, num_outputs() - i0);
    Eigen::Map<const Eigen::ArrayXd> x(inputs_.data() + i0, k);
    const auto rb = r.segment(i0, k);
    spec_.activation.apply(preactivations(w, i0, k), full ? &s : nullptr, &d);
    g.head(m) += d.matrix() * (rb.array() * x).matrix();
    if (full) {
      g.segment(m, m) += s.matrix() * rb;
      g.segment(2 * m, m) += d.matrix() * rb;
    }
  }
  g.head(m).array() *= v;
  if (full) g.segment(2 * m, m).array() *= v;
  return scale_ * g;
}

// Per unit the Hessian couples only (w_j, v_j, b_j):
//   d2/dw2 = v s'' x^2, d2/dwdb = v s'' x, d2/db2 = v s'',
//   d2/dwdv = s' x,     d2/dbdv = s',      d2/dv2 = 0,
// all scaled by 1/sqrt(m). Without v and b it is diagonal.
Vector ShallowNet::output_hvp(const Vector& w, Index i, const Vector& u) const {
  Vector r = Vector::Zero(num_outputs());
  r[i] = 1.0;
  return weighted_hvp(w, r, u);
}

Vector ShallowNet::weighted_hvp(const Vector& w, const Vector& r, const Vector& dir) const {
  const Index m = spec_.width;
  const auto& act = spec_.activation;
  const bool full = spec_.parameterization == ShallowParameterization::kFull;
  Vector out = Vector::Zero(num_params());
  for (Index i = 0; i < num_outputs(); ++i) {
    const double ri = r[i];
    if (ri == 0.0) continue;
    const double x = inputs_[static_cast<std::size_t>(i)];
    for (Index j = 0; j < m; ++j) {
      const Unit p = unit(w, j);
      const double z = p.weight * x + p.bias;
      const double d2 = act.second(z);
      if (!full) {
        out[j] += ri * p.sign * d2 * x * x * dir[j];
        continue;
      }
      const double d1 = act.first(z);
      const double du = x * dir[j] + dir[2 * m + j];
      const double dv = dir[m + j];
      out[j] += ri * (p.sign * d2 * x * du + d1 * x * dv);
      out[m + j] += ri * d1 * du;
      out[2 * m + j] += ri * (p.sign * d2 * du + d1 * dv);
    }
  }
  return scale_ * out;
}

std::optional<double> ShallowNet::output_hessian_norm(const Vector& w, Index i) const {
  check_params(w);
  require(i >= 0 && i < num_outputs(), "ShallowNet: output index out of range");
  require_second_order();
  const auto& act = spec_.activation;
  const double x = inputs_[static_cast<std::size_t>(i)];
  double best = 0.0;
  for (Index j = 0; j < spec_.width; ++j) {
    const Unit p = unit(w, j);
    const double z = p.weight * x + p.bias;
    const double d2 = p.sign * act.second(z);
    if (spec_.parameterization == ShallowParameterization::kHiddenOnly) {
      best = std::max(best, std::abs(d2) * x * x);
      continue;
    }
    // Block in (w_j, v_j, b_j).
    const double d1 = act.first(z);
    Eigen::Matrix3d h;
    h << d2 * x * x, d1 * x, d2 * x,
         d1 * x, 0.0, d1,
         d2 * x, d1, d2;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.computeDirect(h, Eigen::EigenvaluesOnly);
    best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return scale_ * best;
}

bool ShallowNet::at_nondifferentiable_point(const Vector& w) const {
  if (spec_.activation.kind() != ActivationKind::kRelu) return false;
  for (double x : inputs_) {
    for (Index j = 0; j < spec_.width; ++j) {
      const Unit u = unit(w, j);
      if (u.weight * x + u.bias == 0.0) return true;
    }
  }
  return false;
}

}  // namespace ntkcond

#include "ntkcond/sparse_additive.hpp"

#include <algorithm>
#include <cmath>

#include "ntkcond/random.hpp"

namespace ntkcond {

SparseAdditiveModel::SparseAdditiveModel(SparseAdditiveSpec spec, std::vector<double> inputs,
                                         std::uint64_t seed)
    : spec_(spec), inputs_(std::move(inputs)) {
  require(spec_.units >= 1, "SparseAdditiveModel: need at least one unit");
  require(spec_.sparsity >= 1 && spec_.sparsity <= spec_.units,
          "SparseAdditiveModel: sparsity must lie in [1, P]");
  require(!inputs_.empty(), "SparseAdditiveModel: need at least one input");
  scale_ = spec_.scale.value_or(std::sqrt(static_cast<double>(spec_.units)));
  require(scale_ > 0.0, "SparseAdditiveModel: scale s(P) must be positive");

  Rng rng(seed);
  const Index p_count = spec_.units;
  sets_.resize(static_cast<std::size_t>(p_count));
  coefficients_.resize(static_cast<std::size_t>(p_count));
  signs_.resize(p_count);
  for (Index p = 0; p < p_count; ++p) {
    auto& set = sets_[static_cast<std::size_t>(p)];
    for (Index k = 0; k < spec_.sparsity; ++k) set.push_back((p + k) % p_count);
    coefficients_[static_cast<std::size_t>(p)] = rng.unit_vector(spec_.sparsity);
    signs_[p] = rng.sign();
  }
}

Vector SparseAdditiveModel::gaussian_init(const SparseAdditiveSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  return rng.normal_vector(spec.units);
}

double SparseAdditiveModel::unit_smoothness() const {
  double cx = 0.0;
  for (double x : inputs_) cx = std::max(cx, std::abs(x));
  return spec_.activation.smoothness().value_or(0.0) * cx * cx;
}

double SparseAdditiveModel::preactivation(const Vector& w, Index p, double x) const {
  const auto& set = sets_[static_cast<std::size_t>(p)];
  const auto& c = coefficients_[static_cast<std::size_t>(p)];
  double s = 0.0;
  for (std::size_t k = 0; k < set.size(); ++k) s += c[static_cast<Index>(k)] * w[set[k]];
  return x * s;
}

Vector SparseAdditiveModel::evaluate(const Vector& w) const {
  Vector f(num_outputs());
  for (Index i = 0; i < num_outputs(); ++i) {
    const double x = inputs_[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (Index p = 0; p < spec_.units; ++p) sum += signs_[p] * spec_.activation.value(preactivation(w, p, x));
    f[i] = sum / scale_;
  }
  return f;
}

Vector SparseAdditiveModel::gradient(const Vector& w, Index i) const {
  const double x = inputs_[static_cast<std::size_t>(i)];
  Vector g = Vector::Zero(num_params());
  for (Index p = 0; p < spec_.units; ++p) {
    const double d1 = spec_.activation.first(preactivation(w, p, x));
    const auto& set = sets_[static_cast<std::size_t>(p)];
    const auto& c = coefficients_[static_cast<std::size_t>(p)];
    for (std::size_t k = 0; k < set.size(); ++k) g[set[k]] += signs_[p] * d1 * x * c[static_cast<Index>(k)];
  }
  return g / scale_;
}

Matrix SparseAdditiveModel::jacobian(const Vector& w) const {
  Matrix j(num_outputs(), num_params());
  for (Index i = 0; i < num_outputs(); ++i) j.row(i) = gradient(w, i).transpose();
  return j;
}

// Unit p contributes v_p sigma''(z_p) x^2 c_p c_p^T on the block S_p x S_p.
Vector SparseAdditiveModel::output_hvp(const Vector& w, Index i, const Vector& u) const {
  const double x = inputs_[static_cast<std::size_t>(i)];
  Vector out = Vector::Zero(num_params());
  for (Index p = 0; p < spec_.units; ++p) {
    const auto& set = sets_[static_cast<std::size_t>(p)];
    const auto& c = coefficients_[static_cast<std::size_t>(p)];
    double cu = 0.0;
    for (std::size_t k = 0; k < set.size(); ++k) cu += c[static_cast<Index>(k)] * u[set[k]];
    if (cu == 0.0) continue;
    const double coeff = signs_[p] * spec_.activation.second(preactivation(w, p, x)) * x * x * cu;
    for (std::size_t k = 0; k < set.size(); ++k) out[set[k]] += coeff * c[static_cast<Index>(k)];
  }
  return out / scale_;
}

}  // namespace ntkcond

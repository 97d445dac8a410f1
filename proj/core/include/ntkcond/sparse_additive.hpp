#ifndef NTKCOND_SPARSE_ADDITIVE_HPP
#define NTKCOND_SPARSE_ADDITIVE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "ntkcond/activation.hpp"
#include "ntkcond/system.hpp"

namespace ntkcond {

struct SparseAdditiveSpec {
  /// Number of units P; the model has m = P parameters.
  Index units = 1;
  /// Sparsity bound C_s: each unit reads C_s parameters and each parameter
  /// feeds at most C_s units.
  Index sparsity = 1;
  Activation activation{ActivationKind::kTanh};
  /// s(P); sqrt(P) when unset.
  std::optional<double> scale;
};

/// f(w; x) = (1/s(P)) sum_p v_p alpha_p(w; x) with
/// alpha_p(w; x) = sigma(x * <c_p, w_{S_p}>), ||c_p|| = 1, |v_p| = 1 and the
/// cyclic index sets S_p = {p, p+1, ..., p+C_s-1} mod P.
class SparseAdditiveModel final : public System {
 public:
  SparseAdditiveModel(SparseAdditiveSpec spec, std::vector<double> inputs, std::uint64_t seed);

  static Vector gaussian_init(const SparseAdditiveSpec& spec, std::uint64_t seed);

  Index num_params() const override { return spec_.units; }
  Index num_outputs() const override { return static_cast<Index>(inputs_.size()); }
  std::string name() const override { return "sparse"; }

  Vector evaluate(const Vector& w) const override;
  Matrix jacobian(const Vector& w) const override;
  Vector output_hvp(const Vector& w, Index i, const Vector& u) const override;
  Vector gradient(const Vector& w, Index i) const override;
  bool second_order_supported() const override { return spec_.activation.smooth(); }

  const std::vector<std::vector<Index>>& index_sets() const { return sets_; }
  double scale() const { return scale_; }
  /// beta_alpha: bound on every second partial of a unit, beta_sigma * max x^2.
  double unit_smoothness() const;

 private:
  double preactivation(const Vector& w, Index p, double x) const;

  SparseAdditiveSpec spec_;
  std::vector<double> inputs_;
  std::vector<std::vector<Index>> sets_;
  std::vector<Vector> coefficients_;
  Vector signs_;
  double scale_;
};

}  // namespace ntkcond

#endif  // NTKCOND_SPARSE_ADDITIVE_HPP

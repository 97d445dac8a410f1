#ifndef NTKCOND_SHALLOW_NET_HPP
#define NTKCOND_SHALLOW_NET_HPP

#include <cstdint>
#include <vector>

#include "ntkcond/activation.hpp"
#include "ntkcond/system.hpp"

namespace ntkcond {

enum class ShallowParameterization {
  /// f(w; x) = (1/sqrt m) sum_i v_i sigma(w_i x); only w is trained, v fixed in {-1,+1}.
  kHiddenOnly,
  /// f(w, v, b; x) = (1/sqrt m) sum_i v_i sigma(w_i x + b_i); all three trained.
  kFull,
};

struct ShallowNetSpec {
  Index width = 1;
  Activation activation{ActivationKind::kTanh};
  ShallowParameterization parameterization = ShallowParameterization::kFull;
};

struct ShallowInit {
  /// Trainable parameters: [w] or [w, v, b].
  Vector params;
  /// Output signs v in {-1,+1}^m (also stored in params for kFull).
  Vector output_signs;
};

/// One-hidden-layer network with scalar input and 1/sqrt(m) output scaling,
/// evaluated on a fixed list of inputs x_1..x_n.
class ShallowNet final : public System {
 public:
  /// output_signs is required (length m) for kHiddenOnly and ignored for kFull.
  ShallowNet(ShallowNetSpec spec, std::vector<double> inputs, Vector output_signs = Vector());

  /// w ~ N(0,1), v uniform on {-1,+1}, and for kFull b ~ N(0,1).
  static ShallowInit gaussian_init(const ShallowNetSpec& spec, std::uint64_t seed);

  Index num_params() const override;
  Index num_outputs() const override { return static_cast<Index>(inputs_.size()); }
  std::string name() const override { return "shallow"; }

  Vector evaluate(const Vector& w) const override;
  Matrix jacobian(const Vector& w) const override;
  Vector output_hvp(const Vector& w, Index i, const Vector& u) const override;
  Vector weighted_hvp(const Vector& w, const Vector& r, const Vector& u) const override;
  Vector vjp(const Vector& w, const Vector& r) const override;
  Vector gradient(const Vector& w, Index i) const override;

  /// Max over units of the 3x3 (or 1x1) diagonal block norms.
  std::optional<double> output_hessian_norm(const Vector& w, Index i) const override;
  bool second_order_supported() const override { return spec_.activation.smooth(); }
  bool at_nondifferentiable_point(const Vector& w) const override;

  const ShallowNetSpec& spec() const { return spec_; }
  const std::vector<double>& inputs() const { return inputs_; }
  Index width() const { return spec_.width; }

 private:
  struct Unit {
    double weight;
    double sign;
    double bias;
  };
  Unit unit(const Vector& params, Index j) const;
  Vector gradient_for_input(const Vector& params, double x) const;
  /// Pre-activations w_j x_i + b_j for inputs first..first+count-1 (units by inputs).
  Eigen::ArrayXXd preactivations(const Vector& params, Index first, Index count) const;
  Eigen::ArrayXd output_weights(const Vector& params) const;

  ShallowNetSpec spec_;
  std::vector<double> inputs_;
  Vector signs_;
  double scale_;
};

}  // namespace ntkcond

#endif  // NTKCOND_SHALLOW_NET_HPP

#ifndef NTKCOND_ACTIVATION_HPP
#define NTKCOND_ACTIVATION_HPP

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace ntkcond {

enum class ActivationKind { kTanh, kSwish, kSoftplus, kRelu, kIdentity, kQuadratic, kScaledTanh3 };

/// Scalar nonlinearity with its first two derivatives and the global constants
/// L_sigma = sup |sigma'| and beta_sigma = sup |sigma''|.
///
/// ReLU has no smoothness constant; its derivative at 0 uses the one-sided
/// convention sigma'(0) = 0. Quadratic is smooth but not globally Lipschitz,
/// so its lipschitz() is +infinity.
class Activation {
 public:
  explicit Activation(ActivationKind kind = ActivationKind::kTanh) : kind_(kind) {}

  /// Accepts: tanh, swish, softplus, relu, identity (alias linear), quadratic,
  /// tanh3 (alias scaled-tanh-3).
  static Activation parse(std::string_view name);

  ActivationKind kind() const { return kind_; }
  std::string name() const;

  double value(double z) const;
  double first(double z) const;
  double second(double z) const;
  /// Elementwise sigma and sigma' over an array; either output may be null.
  void apply(const Eigen::ArrayXXd& z, Eigen::ArrayXXd* value, Eigen::ArrayXXd* first) const;

  double lipschitz() const;
  std::optional<double> smoothness() const;
  bool smooth() const { return smoothness().has_value(); }
  /// True where the derivative is not classically defined (ReLU at 0).
  bool is_kink(double z) const { return kind_ == ActivationKind::kRelu && z == 0.0; }

 private:
  ActivationKind kind_;
};

/// Elementwise output map phi used by transformed systems Phi(F)_i = phi(F_i).
struct OutputMap {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> first;
  std::function<double(double)> second;
  /// sup |phi'| over the real line (infinity when unbounded).
  double derivative_bound = 1.0;

  static OutputMap identity();
  static OutputMap linear(double scale);
  static OutputMap from_activation(const Activation& activation);
  /// identity | linear | tanh3 | swish | tanh | softplus
  static OutputMap parse(std::string_view name);
};

}  // namespace ntkcond

#endif  // NTKCOND_ACTIVATION_HPP

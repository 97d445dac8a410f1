#ifndef NTKCOND_DEEP_MLP_HPP
#define NTKCOND_DEEP_MLP_HPP

#include <cstdint>
#include <vector>

#include "ntkcond/activation.hpp"
#include "ntkcond/system.hpp"

namespace ntkcond {

struct DeepMlpSpec {
  /// Number of weight layers L >= 2.
  Index depth = 2;
  Index input_dim = 1;
  Index width = 1;
  Activation activation{ActivationKind::kTanh};
};

/// L-layer fully connected network with uniform hidden width m and a scalar
/// linear output:
///   z^(l) = W^(l) a^(l-1) / sqrt(m_{l-1}),  a^(l) = sigma(z^(l)),  f = z^(L),
/// with a^(0) = x and m_0 = d. No biases.
///
/// Parameters are the column-major flattening of W^(1) (m x d),
/// W^(2..L-1) (m x m) and W^(L) (1 x m), concatenated in layer order.
class DeepMlp final : public System {
 public:
  DeepMlp(DeepMlpSpec spec, std::vector<Vector> inputs);

  /// Every weight i.i.d. N(0,1).
  static Vector gaussian_init(const DeepMlpSpec& spec, std::uint64_t seed);
  static Index parameter_count(const DeepMlpSpec& spec);

  Index num_params() const override { return num_params_; }
  Index num_outputs() const override { return static_cast<Index>(inputs_.size()); }
  std::string name() const override { return "deep"; }

  Vector evaluate(const Vector& w) const override;
  Matrix jacobian(const Vector& w) const override;
  Vector output_hvp(const Vector& w, Index i, const Vector& u) const override;
  Vector weighted_hvp(const Vector& w, const Vector& r, const Vector& u) const override;
  Vector vjp(const Vector& w, const Vector& r) const override;
  Vector gradient(const Vector& w, Index i) const override;

  bool second_order_supported() const override { return spec_.activation.smooth(); }

  const DeepMlpSpec& spec() const { return spec_; }
  /// Layer l in 1..L as a rows x cols view into w.
  Eigen::Map<const Matrix> layer(const Vector& w, Index l) const;
  Index layer_rows(Index l) const;
  Index layer_cols(Index l) const;
  Index layer_offset(Index l) const;
  /// ||W|| = sum_l ||W^(l)||_F.
  double tuple_norm(const Vector& w) const;

 private:
  struct Forward {
    std::vector<Matrix> pre;   // z^(l), l = 1..L, columns are inputs
    std::vector<Matrix> post;  // a^(l), l = 0..L-1
  };
  Forward forward(const Vector& w, const Matrix& x) const;
  Matrix input_block(Index first, Index count) const;
  /// sum_k weights_k * grad f(x_k); x holds the inputs as columns.
  Vector backward(const Vector& w, const Forward& fw, const Matrix& seed) const;
  Vector hvp_block(const Vector& w, const Matrix& x, const Matrix& seed, const Vector& dir) const;
  double scale(Index l) const;

  DeepMlpSpec spec_;
  std::vector<Vector> inputs_;
  Matrix input_matrix_;
  std::vector<Index> offsets_;
  Index num_params_ = 0;
};

}  // namespace ntkcond

#endif  // NTKCOND_DEEP_MLP_HPP

#include "ntkcond/deep_mlp.hpp"

#include <cmath>

#include "ntkcond/random.hpp"

namespace ntkcond {

DeepMlp::DeepMlp(DeepMlpSpec spec, std::vector<Vector> inputs)
    : spec_(spec), inputs_(std::move(inputs)) {
  require(spec_.depth >= 2, "DeepMlp: depth must be at least 2");
  require(spec_.width >= 1 && spec_.input_dim >= 1, "DeepMlp: widths must be positive");
  require(!inputs_.empty(), "DeepMlp: need at least one input");
  input_matrix_.resize(spec_.input_dim, static_cast<Index>(inputs_.size()));
  for (std::size_t k = 0; k < inputs_.size(); ++k) {
    require(inputs_[k].size() == spec_.input_dim, "DeepMlp: input has wrong dimension");
    input_matrix_.col(static_cast<Index>(k)) = inputs_[k];
  }
  offsets_.assign(static_cast<std::size_t>(spec_.depth) + 2, 0);
  for (Index l = 1; l <= spec_.depth; ++l) {
    offsets_[static_cast<std::size_t>(l + 1)] =
        offsets_[static_cast<std::size_t>(l)] + layer_rows(l) * layer_cols(l);
  }
  num_params_ = offsets_[static_cast<std::size_t>(spec_.depth) + 1];
}

Index DeepMlp::parameter_count(const DeepMlpSpec& spec) {
  return spec.width * spec.input_dim + (spec.depth - 2) * spec.width * spec.width + spec.width;
}

Vector DeepMlp::gaussian_init(const DeepMlpSpec& spec, std::uint64_t seed) {
  require(spec.depth >= 2 && spec.width >= 1 && spec.input_dim >= 1,
          "DeepMlp::gaussian_init: invalid spec");
  Rng rng(seed);
  return rng.normal_vector(parameter_count(spec));
}

Index DeepMlp::layer_rows(Index l) const { return l == spec_.depth ? 1 : spec_.width; }
Index DeepMlp::layer_cols(Index l) const { return l == 1 ? spec_.input_dim : spec_.width; }
Index DeepMlp::layer_offset(Index l) const { return offsets_[static_cast<std::size_t>(l)]; }
double DeepMlp::scale(Index l) const { return 1.0 / std::sqrt(static_cast<double>(layer_cols(l))); }

Eigen::Map<const Matrix> DeepMlp::layer(const Vector& w, Index l) const {
  return Eigen::Map<const Matrix>(w.data() + layer_offset(l), layer_rows(l), layer_cols(l));
}

double DeepMlp::tuple_norm(const Vector& w) const {
  double total = 0.0;
  for (Index l = 1; l <= spec_.depth; ++l) total += layer(w, l).norm();
  return total;
}

Matrix DeepMlp::input_block(Index first, Index count) const {
  return input_matrix_.middleCols(first, count);
}

DeepMlp::Forward DeepMlp::forward(const Vector& w, const Matrix& x) const {
  const Index depth = spec_.depth;
  const auto& act = spec_.activation;
  Forward fw;
  fw.pre.resize(static_cast<std::size_t>(depth) + 1);
  fw.post.resize(static_cast<std::size_t>(depth));
  fw.post[0] = x;
  for (Index l = 1; l <= depth; ++l) {
    const auto lu = static_cast<std::size_t>(l);
    fw.pre[lu] = scale(l) * (layer(w, l) * fw.post[lu - 1]);
    if (l < depth) fw.post[lu] = fw.pre[lu].unaryExpr([&](double z) { return act.value(z); });
  }
  return fw;
}

Vector DeepMlp::backward(const Vector& w, const Forward& fw, const Matrix& seed) const {
  const Index depth = spec_.depth;
  const auto& act = spec_.activation;
  Vector grad(num_params_);
  Matrix g = seed;  // d/dz^(l), one column per input
  for (Index l = depth; l >= 1; --l) {
    const auto lu = static_cast<std::size_t>(l);
    Eigen::Map<Matrix> dw(grad.data() + layer_offset(l), layer_rows(l), layer_cols(l));
    dw.noalias() = scale(l) * (g * fw.post[lu - 1].transpose());
    if (l > 1) {
      Matrix ga = scale(l) * (layer(w, l).transpose() * g);
      g = ga.cwiseProduct(fw.pre[lu - 1].unaryExpr([&](double z) { return act.first(z); }));
    }
  }
  return grad;
}

Vector DeepMlp::evaluate(const Vector& w) const {
  const Forward fw = forward(w, input_matrix_);
  return fw.pre[static_cast<std::size_t>(spec_.depth)].row(0).transpose();
}

Vector DeepMlp::gradient(const Vector& w, Index i) const {
  const Matrix x = input_block(i, 1);
  const Forward fw = forward(w, x);
  return backward(w, fw, Matrix::Ones(1, 1));
}

Matrix DeepMlp::jacobian(const Vector& w) const {
  Matrix j(num_outputs(), num_params_);
  for (Index i = 0; i < num_outputs(); ++i) j.row(i) = gradient(w, i).transpose();
  return j;
}

Vector DeepMlp::vjp(const Vector& w, const Vector& r) const {
  const Forward fw = forward(w, input_matrix_);
  return backward(w, fw, r.transpose());
}

// Forward-over-reverse: push the direction V through the forward pass
// (tangents of z and a), then differentiate the backward recursion.
Vector DeepMlp::hvp_block(const Vector& w, const Matrix& x, const Matrix& seed,
                          const Vector& dir) const {
  const Index depth = spec_.depth;
  const auto& act = spec_.activation;
  const Forward fw = forward(w, x);
  const Index k = x.cols();

  std::vector<Matrix> rz(static_cast<std::size_t>(depth) + 1);
  std::vector<Matrix> ra(static_cast<std::size_t>(depth));
  ra[0] = Matrix::Zero(spec_.input_dim, k);
  for (Index l = 1; l <= depth; ++l) {
    const auto lu = static_cast<std::size_t>(l);
    Eigen::Map<const Matrix> v(dir.data() + layer_offset(l), layer_rows(l), layer_cols(l));
    rz[lu] = scale(l) * (v * fw.post[lu - 1] + layer(w, l) * ra[lu - 1]);
    if (l < depth) {
      ra[lu] = rz[lu].cwiseProduct(fw.pre[lu].unaryExpr([&](double z) { return act.first(z); }));
    }
  }

  Vector out(num_params_);
  Matrix g = seed;
  Matrix rg = Matrix::Zero(seed.rows(), seed.cols());
  for (Index l = depth; l >= 1; --l) {
    const auto lu = static_cast<std::size_t>(l);
    Eigen::Map<Matrix> rdw(out.data() + layer_offset(l), layer_rows(l), layer_cols(l));
    rdw.noalias() = scale(l) * (rg * fw.post[lu - 1].transpose() + g * ra[lu - 1].transpose());
    if (l > 1) {
      Eigen::Map<const Matrix> v(dir.data() + layer_offset(l), layer_rows(l), layer_cols(l));
      const auto w_l = layer(w, l);
      const Matrix ga = scale(l) * (w_l.transpose() * g);
      const Matrix rga = scale(l) * (v.transpose() * g + w_l.transpose() * rg);
      const Matrix& z = fw.pre[lu - 1];
      const Matrix d1 = z.unaryExpr([&](double t) { return act.first(t); });
      const Matrix d2 = z.unaryExpr([&](double t) { return act.second(t); });
      rg = d2.cwiseProduct(rz[lu - 1]).cwiseProduct(ga) + d1.cwiseProduct(rga);
      g = d1.cwiseProduct(ga);
    }
  }
  return out;
}

Vector DeepMlp::output_hvp(const Vector& w, Index i, const Vector& u) const {
  return hvp_block(w, input_block(i, 1), Matrix::Ones(1, 1), u);
}

Vector DeepMlp::weighted_hvp(const Vector& w, const Vector& r, const Vector& u) const {
  return hvp_block(w, input_matrix_, r.transpose(), u);
}

}  // namespace ntkcond

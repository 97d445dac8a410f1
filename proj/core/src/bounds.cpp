#include "ntkcond/bounds.hpp"

#include <cmath>
#include <string>

namespace ntkcond::bounds {

double sparse_hessian_bound(double sparsity, double beta_alpha, double s_p) {
  require(sparsity > 0.0 && beta_alpha > 0.0 && s_p > 0.0,
          "sparse_hessian_bound: all arguments must be positive");
  return sparsity * sparsity * sparsity * beta_alpha / s_p;
}

double init_output_bound(Index depth, double l_sigma, double c0, double c_x, double delta) {
  require(delta > 0.0 && delta <= 1.0, "init_output_bound: delta must lie in (0, 1]");
  const double k = static_cast<double>(depth - 1);
  return std::pow(l_sigma, k) * std::pow(c0, k) * c_x / std::sqrt(delta);
}

double DeepBounds::init_output_bound(double delta) const {
  return bounds::init_output_bound(depth, l_sigma, c0, c_x, delta);
}

DeepBounds deep_bounds(const DeepBoundsInput& in) {
  require(in.depth >= 2, "deep_bounds: depth L must be at least 2");
  require(in.width > 0.0, "deep_bounds: width must be positive");
  require(in.radius >= 0.0, "deep_bounds: radius must be nonnegative");
  require(in.l_sigma > 0.0 && std::isfinite(in.l_sigma),
          "deep_bounds: L_sigma must be positive and finite");
  require(in.beta_sigma >= 0.0 && std::isfinite(in.beta_sigma),
          "deep_bounds: beta_sigma must be nonnegative and finite");
  require(in.c0 > 0.0 && in.c_x > 0.0 && in.s0 > 0.0, "deep_bounds: c0, C_x, s0 must be positive");
  if (!(in.width > in.radius * in.radius)) {
    throw PreconditionError("deep_bounds: width m = " + std::to_string(in.width) +
                            " must exceed R^2 = " + std::to_string(in.radius * in.radius));
  }

  const Index big_l = in.depth;
  const double l_s = in.l_sigma;
  const double c0 = in.c0;
  const double r = in.radius;
  const auto p = [](double base, Index e) { return std::pow(base, static_cast<double>(e)); };

  DeepBounds out;
  out.depth = big_l;
  out.l_sigma = l_s;
  out.c0 = c0;
  out.c_x = in.c_x;
  out.lipschitz = static_cast<double>(big_l) * p(l_s, big_l - 1) * p(c0 + 1.0, big_l - 1) * in.c_x;

  // C'_b^(L-1) = R, then downwards to l = 1.
  std::vector<double> c_b_prime(static_cast<std::size_t>(big_l), 0.0);  // index l
  c_b_prime[static_cast<std::size_t>(big_l - 1)] = r;
  for (Index l = big_l - 2; l >= 1; --l) {
    c_b_prime[static_cast<std::size_t>(l)] =
        p(l_s, big_l - l - 1) * p(c0, big_l - l - 1) * r +
        in.s0 * in.beta_sigma * p(l_s, big_l - 2) * p(c0 + r, big_l) * in.c_x +
        c0 * l_s * c_b_prime[static_cast<std::size_t>(l + 1)];
  }
  double sum = 0.0;
  for (Index l = 1; l <= big_l - 1; ++l) {
    const double cb = in.s0 * p(l_s, big_l - l - 1) * p(c0, big_l - l) +
                      c_b_prime[static_cast<std::size_t>(l)];
    out.c_b.push_back(cb);
    sum += p(l_s, 2 * l - 1) * p(c0 + r, 2 * l - 2) * cb;
  }
  out.c_prime = in.beta_sigma * in.c_x * in.c_x * sum + p(l_s, big_l - 1) * p(c0 + r, big_l - 2) * in.c_x;
  out.hessian_scale = static_cast<double>(big_l * big_l) * out.c_prime / std::sqrt(in.width);
  return out;
}

double width_requirement(double n, double mu, double lambda_min_k0, Index depth) {
  require(n > 0.0, "width_requirement: n must be positive");
  require(depth >= 1, "width_requirement: depth must be positive");
  if (!(mu > 0.0 && mu < lambda_min_k0)) {
    throw ContractError("width_requirement: mu must lie in (0, lambda_min(K(W0)))");
  }
  const double gap = lambda_min_k0 - mu;
  return n / (std::pow(mu, static_cast<double>(6 * depth + 2)) * gap * gap);
}

}  // namespace ntkcond::bounds

#ifndef NTKCOND_BOUNDS_HPP
#define NTKCOND_BOUNDS_HPP

#include <vector>

#include "ntkcond/types.hpp"

namespace ntkcond::bounds {

/// C_s^3 beta_alpha / s(P): Hessian spectral-norm bound for a sparse additive
/// model whose units read at most C_s parameters.
double sparse_hessian_bound(double sparsity, double beta_alpha, double s_p);

struct DeepBoundsInput {
  Index depth = 2;          // L
  double width = 1.0;       // m
  double radius = 1.0;      // R
  double l_sigma = 1.0;     // L_sigma
  double beta_sigma = 0.0;  // beta_sigma
  double c0 = 3.0;          // ||W_0^(l)||_2 <= c0 sqrt(m)
  double c_x = 1.0;         // C_x >= ||x||_inf
  double s0 = 1.0;          // ||b_0^(l)||_inf <= s0 ||b_0^(l)|| / sqrt(m)
};

struct DeepBounds {
  /// L_f = L L_sigma^{L-1} (c0 + 1)^{L-1} C_x.
  double lipschitz = 0.0;
  /// L^2 C'(R) / sqrt(m), bound on the Hessian spectral norm over B(W0, R).
  double hessian_scale = 0.0;
  double c_prime = 0.0;
  /// C_b^(l)(R) for l = 1..L-1 (index 0 holds l = 1).
  std::vector<double> c_b;
  /// (1/sqrt(delta)) L_sigma^{L-1} c0^{L-1} C_x.
  double init_output_bound(double delta) const;

  Index depth = 2;
  double l_sigma = 1.0;
  double c0 = 3.0;
  double c_x = 1.0;
};

/// Throws PreconditionError when m <= R^2 and ContractError for L < 2 or
/// nonpositive constants.
DeepBounds deep_bounds(const DeepBoundsInput& in);

double init_output_bound(Index depth, double l_sigma, double c0, double c_x, double delta);

/// n / (mu^{6L+2} (lambda_min - mu)^2), an order-of-magnitude width scale
/// with the hidden constant dropped.
double width_requirement(double n, double mu, double lambda_min_k0, Index depth);

}  // namespace ntkcond::bounds

#endif  // NTKCOND_BOUNDS_HPP

#ifndef NTKCOND_CONDITIONING_HPP
#define NTKCOND_CONDITIONING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ntkcond/activation.hpp"
#include "ntkcond/linalg.hpp"
#include "ntkcond/system.hpp"

namespace ntkcond {

/// Largest n for which the dense n x n kernel is formed.
inline constexpr Index kKernelCapacity = 10000;

struct TangentKernel {
  Matrix matrix;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  Vector anchor;
  /// "svd" (singular values of J), "dense" or "lanczos".
  std::string method;
  std::optional<double> lipschitz_estimate;
};

/// K(w) = J J^T. When n <= min(m, dense_limit) the extremes come from the
/// singular values of J, which resolves lambda_min far below eps * lambda_max;
/// otherwise from the kernel itself (dense or Lanczos above dense_limit).
TangentKernel tangent_kernel(const System& system, const Vector& w, Index dense_limit = 512);
TangentKernel kernel_from_jacobian(const Matrix& j, const Vector& anchor, Index dense_limit = 512);
/// Extremes of an already formed symmetric kernel matrix.
TangentKernel kernel_from_matrix(Matrix k, const Vector& anchor, Index dense_limit = 512);

/// 1/2 ||grad L||^2 / L at w; +infinity when L(w) = 0.
double pl_star_ratio(const System& system, const Vector& w, const Vector& targets);

struct SamplePoint {
  double lambda_min_k = 0.0;
  double lambda_max_k = 0.0;
  double lambda_max_loss = 0.0;
  double pl_ratio = 0.0;
  double residual_norm = 0.0;
};

struct ConditioningCertificate {
  Vector center;
  double radius = 0.0;
  double mu_hat = 0.0;
  double lambda_max_loss_hat = 0.0;
  /// Present only when mu_hat > 0.
  std::optional<double> kappa_hat;
  double pl_ratio_min = 0.0;
  /// sup ||F(w) - y|| and sup ||J(w)||_2 over the same samples.
  double residual_norm_max = 0.0;
  double jacobian_norm_max = 0.0;
  Index sample_count = 0;
  std::uint64_t seed = 0;
  /// lambda values at or below (max(n, m) eps sigma_max(J))^2 are numerically zero.
  double rank_tolerance = 0.0;
  /// mu_hat above rank_tolerance.
  bool uniformly_conditioned = false;
  std::vector<SamplePoint> samples;
};

struct CertifyOptions {
  Index samples = 64;
  std::uint64_t seed = 0;
  /// Extra points (trajectory iterates, say) added to the sample set.
  std::vector<Vector> extra_points;
  linalg::IterationControl power{1e-8, 1000, 0};
};

/// Samples B(w0, R) uniformly plus w0 and any extra points, and aggregates
/// lambda_min(K), lambda_max(H_L) and the PL* ratio over them.
ConditioningCertificate certify_ball(const System& system, const Vector& w0, double radius,
                                     const Vector& targets, const CertifyOptions& options = {});

struct ConstantsEstimate {
  double lipschitz = 0.0;        // L_F_hat
  double smoothness = 0.0;       // beta_F_hat
  double gamma = 0.0;            // gamma_hat
  double safety_factor = 1.1;
  /// Raw sampled maxima before the safety factor.
  double max_jacobian_norm = 0.0;
  double max_hessian_norm = 0.0;
  double max_equation_smoothness = 0.0;
  Index sample_count = 0;
  std::uint64_t seed = 0;
  double radius = 0.0;
};

struct EstimateOptions {
  Index samples = 64;
  std::uint64_t seed = 0;
  double safety_factor = 1.1;
  /// Needed for gamma_hat; without targets the residual term is dropped.
  std::optional<Vector> targets;
  std::vector<Vector> extra_points;
};

/// L_F_hat = s max ||J||_2, beta_F_hat = s sqrt(n) max ||H||,
/// gamma_hat = s max_i lambda_max(grad F_i grad F_i^T + r_i H_i), sampled over
/// B(w0, R) plus w0. Rejects systems without second-order support.
ConstantsEstimate estimate_constants(const System& system, const Vector& w0, double radius,
                                     const EstimateOptions& options = {});

struct TransformedKernel {
  TangentKernel kernel;
  double rho = 0.0;
  double max_derivative = 0.0;
  /// False when some phi'(F_i) vanishes.
  bool transferable = true;
};

/// K~ = D K D with D = diag(phi'(f)), rho = min_i |phi'(f_i)|.
TransformedKernel transformed_kernel(const TangentKernel& base, const Vector& f_values,
                                     const OutputMap& phi);

/// Uniform points in B(w0, R), w0 first, then extra points.
std::vector<Vector> ball_samples(const Vector& w0, double radius, Index count, std::uint64_t seed,
                                 const std::vector<Vector>& extra = {});

}  // namespace ntkcond

#endif  // NTKCOND_CONDITIONING_HPP

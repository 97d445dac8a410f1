#include "ntkcond/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "ntkcond/hessian.hpp"
#include "ntkcond/random.hpp"

namespace ntkcond {
namespace {

// Singular values of a wide J (n <= m), via a thin QR of J^T first.
Vector wide_singular_values(const Matrix& j) {
  const Index n = j.rows();
  Eigen::HouseholderQR<Matrix> qr(j.transpose());
  const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix> svd(r);
  return svd.singularValues();
}

double jacobian_norm(const Matrix& j) {
  if (j.size() == 0) return 0.0;
  const Matrix gram = j.rows() <= j.cols() ? Matrix(j * j.transpose()) : Matrix(j.transpose() * j);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(solver.eigenvalues().maxCoeff(), 0.0));
}

}  // namespace

std::vector<Vector> ball_samples(const Vector& w0, double radius, Index count, std::uint64_t seed,
                                 const std::vector<Vector>& extra) {
  std::vector<Vector> points;
  points.reserve(static_cast<std::size_t>(count) + 1 + extra.size());
  points.push_back(w0);
  Rng rng(seed);
  for (Index k = 0; k < count; ++k) points.push_back(rng.in_ball(w0, radius));
  for (const auto& p : extra) {
    require(p.size() == w0.size(), "ball_samples: extra point has wrong length");
    points.push_back(p);
  }
  return points;
}

TangentKernel kernel_from_matrix(Matrix k, const Vector& anchor, Index dense_limit) {
  require(k.rows() == k.cols(), "kernel_from_matrix: kernel must be square");
  const linalg::Extremes e = linalg::symmetric_extremes(k, dense_limit);
  TangentKernel out;
  out.matrix = std::move(k);
  out.lambda_min = e.lambda_min;
  out.lambda_max = e.lambda_max;
  out.anchor = anchor;
  out.method = e.method;
  return out;
}

TangentKernel kernel_from_jacobian(const Matrix& j, const Vector& anchor, Index dense_limit) {
  const Index n = j.rows();
  if (n > kKernelCapacity) {
    throw CapacityError("tangent kernel: n = " + std::to_string(n) + " exceeds the dense limit of " +
                        std::to_string(kKernelCapacity) +
                        " equations; use sampled-trace mode (kernel diagonal) instead");
  }
  require(n > 0, "tangent kernel: system has no outputs");
  Matrix k = j * j.transpose();
  k = 0.5 * (k + k.transpose());
  if (n > dense_limit) return kernel_from_matrix(std::move(k), anchor, dense_limit);

  TangentKernel out;
  if (n <= j.cols()) {
    const Vector s = wide_singular_values(j);
    out.lambda_max = s(0) * s(0);
    out.lambda_min = s(n - 1) * s(n - 1);
  } else {
    Eigen::JacobiSVD<Matrix> svd(j);
    const double s0 = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    out.lambda_max = s0 * s0;
    out.lambda_min = 0.0;  // rank <= m < n
  }
  out.matrix = std::move(k);
  out.anchor = anchor;
  out.method = "svd";
  return out;
}

TangentKernel tangent_kernel(const System& system, const Vector& w, Index dense_limit) {
  system.check_params(w);
  if (system.num_outputs() > kKernelCapacity) {
    throw CapacityError("tangent kernel: n = " + std::to_string(system.num_outputs()) +
                        " exceeds the dense limit of " + std::to_string(kKernelCapacity) +
                        " equations; use sampled-trace mode (kernel diagonal) instead");
  }
  return kernel_from_jacobian(system.jacobian(w), w, dense_limit);
}

double pl_star_ratio(const System& system, const Vector& w, const Vector& targets) {
  system.check_params(w);
  require(targets.size() == system.num_outputs(), "pl_star_ratio: targets have wrong length");
  const Vector r = system.evaluate(w) - targets;
  const double loss = 0.5 * r.squaredNorm();
  if (loss == 0.0) return std::numeric_limits<double>::infinity();
  const Vector g = system.vjp(w, r);
  return 0.5 * g.squaredNorm() / loss;
}

ConditioningCertificate certify_ball(const System& system, const Vector& w0, double radius,
                                     const Vector& targets, const CertifyOptions& options) {
  system.check_params(w0);
  system.require_second_order();
  require(options.samples >= 1, "certify_ball: need at least one sample");
  require(radius > 0.0, "certify_ball: radius must be positive");
  require(targets.size() == system.num_outputs(), "certify_ball: targets have wrong length");

  ConditioningCertificate cert;
  cert.center = w0;
  cert.radius = radius;
  cert.seed = options.seed;
  cert.mu_hat = std::numeric_limits<double>::infinity();
  cert.pl_ratio_min = std::numeric_limits<double>::infinity();

  const auto points = ball_samples(w0, radius, options.samples, options.seed, options.extra_points);
  const Index m = system.num_params();
  const Index n = system.num_outputs();
  double sigma_max = 0.0;
  std::uint64_t stream = 0;
  for (const auto& w : points) {
    const Matrix j = system.jacobian(w);
    const TangentKernel k = kernel_from_jacobian(j, w);
    const LossHessianOperator hl(system, w, targets);
    linalg::IterationControl control = options.power;
    control.seed = derive_seed(options.seed, ++stream);
    const linalg::PowerResult top = linalg::largest_eigenvalue(
        [&hl](const Vector& u) { return hl.apply(u); }, m, control);

    SamplePoint s;
    s.lambda_min_k = k.lambda_min;
    s.lambda_max_k = k.lambda_max;
    s.lambda_max_loss = top.value;
    s.residual_norm = hl.residual().norm();
    const double loss = 0.5 * s.residual_norm * s.residual_norm;
    s.pl_ratio = loss > 0.0
                     ? 0.5 * (j.transpose() * hl.residual()).squaredNorm() / loss
                     : std::numeric_limits<double>::infinity();
    cert.samples.push_back(s);

    cert.mu_hat = std::min(cert.mu_hat, s.lambda_min_k);
    cert.lambda_max_loss_hat = std::max(cert.lambda_max_loss_hat, s.lambda_max_loss);
    cert.pl_ratio_min = std::min(cert.pl_ratio_min, s.pl_ratio);
    cert.residual_norm_max = std::max(cert.residual_norm_max, s.residual_norm);
    sigma_max = std::max(sigma_max, std::sqrt(std::max(k.lambda_max, 0.0)));
  }
  cert.jacobian_norm_max = sigma_max;
  cert.sample_count = static_cast<Index>(points.size());
  // Numerical rank test on J: sigma <= max(n, m) eps sigma_max counts as zero.
  const double rank_floor = static_cast<double>(std::max(n, m)) *
                            std::numeric_limits<double>::epsilon() * sigma_max;
  cert.rank_tolerance = rank_floor * rank_floor;
  cert.uniformly_conditioned = cert.mu_hat > cert.rank_tolerance;
  if (cert.mu_hat > 0.0) cert.kappa_hat = cert.lambda_max_loss_hat / cert.mu_hat;
  return cert;
}

ConstantsEstimate estimate_constants(const System& system, const Vector& w0, double radius,
                                     const EstimateOptions& options) {
  system.check_params(w0);
  system.require_second_order();
  require(options.samples >= 2, "estimate_constants: need at least two samples");
  require(radius >= 0.0, "estimate_constants: radius must be nonnegative");
  require(options.safety_factor >= 1.0, "estimate_constants: safety factor must be >= 1");
  if (options.targets) {
    require(options.targets->size() == system.num_outputs(),
            "estimate_constants: targets have wrong length");
  }

  const Index n = system.num_outputs();
  const Index m = system.num_params();
  const auto points =
      ball_samples(w0, radius, options.samples, options.seed, options.extra_points);
  ConstantsEstimate est;
  est.safety_factor = options.safety_factor;
  est.seed = options.seed;
  est.radius = radius;
  std::uint64_t stream = 0;
  for (const auto& w : points) {
    const Matrix j = system.jacobian(w);
    est.max_jacobian_norm = std::max(est.max_jacobian_norm, jacobian_norm(j));

    HessianNormOptions hopts;
    hopts.seed = derive_seed(options.seed, ++stream);
    const HessianNormEstimate h = hessian_tensor_norm(system, w, hopts);
    est.max_hessian_norm = std::max(est.max_hessian_norm, h.tensor_norm);

    Vector r = Vector::Zero(n);
    if (options.targets) r = system.evaluate(w) - *options.targets;
    for (Index i = 0; i < n; ++i) {
      const Vector g = j.row(i).transpose();
      double top = g.squaredNorm();
      if (r[i] != 0.0) {
        const double ri = r[i];
        linalg::IterationControl control{1e-8, 1000, derive_seed(options.seed, ++stream)};
        top = linalg::largest_eigenvalue(
                  [&](const Vector& u) -> Vector {
                    return g * g.dot(u) + ri * system.output_hvp(w, i, u);
                  },
                  m, control)
                  .value;
      }
      est.max_equation_smoothness = std::max(est.max_equation_smoothness, top);
    }
  }
  est.sample_count = static_cast<Index>(points.size());
  est.lipschitz = options.safety_factor * est.max_jacobian_norm;
  est.smoothness = options.safety_factor * std::sqrt(static_cast<double>(n)) * est.max_hessian_norm;
  est.gamma = options.safety_factor * est.max_equation_smoothness;
  return est;
}

TransformedKernel transformed_kernel(const TangentKernel& base, const Vector& f_values,
                                     const OutputMap& phi) {
  require(f_values.size() == base.matrix.rows(),
          "transformed_kernel: f_values length must match the kernel size");
  require(static_cast<bool>(phi.first), "transformed_kernel: output map has no derivative");
  const Vector d = f_values.unaryExpr([&phi](double z) { return phi.first(z); });
  Matrix k = d.asDiagonal() * base.matrix * d.asDiagonal();
  k = 0.5 * (k + k.transpose());
  TransformedKernel out;
  out.kernel = kernel_from_matrix(std::move(k), base.anchor);
  out.rho = d.cwiseAbs().minCoeff();
  out.max_derivative = d.cwiseAbs().maxCoeff();
  out.transferable = out.rho > 0.0;
  return out;
}

}  // namespace ntkcond

#include "ntkcond/hessian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "ntkcond/conditioning.hpp"
#include "ntkcond/linalg.hpp"
#include "ntkcond/random.hpp"

namespace ntkcond {

Matrix dense_output_hessian(const System& system, const Vector& w, Index i) {
  const Index m = system.num_params();
  Matrix h(m, m);
  Vector e = Vector::Zero(m);
  for (Index k = 0; k < m; ++k) {
    e[k] = 1.0;
    h.col(k) = system.output_hvp(w, i, e);
    e[k] = 0.0;
  }
  return 0.5 * (h + h.transpose());
}

HessianNormEstimate hessian_tensor_norm(const System& system, const Vector& w,
                                        const HessianNormOptions& options) {
  system.check_params(w);
  system.require_second_order();
  const Index n = system.num_outputs();
  const Index m = system.num_params();
  HessianNormEstimate est;
  est.per_output_norms = Vector::Zero(n);
  est.residuals = Vector::Zero(n);

  if (options.use_structure) {
    bool all = n > 0;
    for (Index i = 0; i < n && all; ++i) {
      const auto v = system.output_hessian_norm(w, i);
      if (v) {
        est.per_output_norms[i] = *v;
      } else {
        all = false;
      }
    }
    if (all) {
      est.method = "structured";
      est.tensor_norm = est.per_output_norms.maxCoeff();
      return est;
    }
  }
  if (m <= options.dense_limit) {
    est.method = "dense";
    for (Index i = 0; i < n; ++i) {
      Eigen::SelfAdjointEigenSolver<Matrix> solver(dense_output_hessian(system, w, i),
                                                   Eigen::EigenvaluesOnly);
      est.per_output_norms[i] = solver.eigenvalues().cwiseAbs().maxCoeff();
    }
  } else {
    est.method = "power";
    for (Index i = 0; i < n; ++i) {
      linalg::IterationControl control{options.tolerance, options.max_iterations,
                                       derive_seed(options.seed, static_cast<std::uint64_t>(i))};
      const linalg::PowerResult r = linalg::squared_power_norm(
          [&](const Vector& u) { return system.output_hvp(w, i, u); }, m, control);
      est.per_output_norms[i] = r.value;
      est.residuals[i] = r.residual;
      est.iterations_used = std::max(est.iterations_used, r.iterations);
      est.converged = est.converged && r.converged;
    }
  }
  est.tensor_norm = n > 0 ? est.per_output_norms.maxCoeff() : 0.0;
  return est;
}

namespace {

double symmetric_norm(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

KernelChangeReport kernel_change_report(const System& system, const Vector& w0, double radius,
                                        const std::vector<Vector>& points, double lipschitz,
                                        double hessian_norm) {
  system.check_params(w0);
  require(lipschitz >= 0.0 && hessian_norm >= 0.0 && radius >= 0.0,
          "kernel_change_report: constants must be nonnegative");
  KernelChangeReport rep;
  rep.lipschitz = lipschitz;
  rep.hessian_norm = hessian_norm;
  rep.radius = radius;
  rep.epsilon = 2.0 * lipschitz * std::sqrt(static_cast<double>(system.num_outputs())) * radius *
                hessian_norm;
  const Matrix j0 = system.jacobian(w0);
  const Matrix k0 = j0 * j0.transpose();
  for (const auto& w : points) {
    system.check_params(w);
    const Matrix j = system.jacobian(w);
    Matrix diff = j * j.transpose() - k0;
    diff = 0.5 * (diff + diff.transpose());
    const double change = symmetric_norm(diff);
    rep.changes.push_back(change);
    rep.passed.push_back(change <= rep.epsilon);
    rep.all_passed = rep.all_passed && rep.passed.back();
  }
  return rep;
}

KernelChangeReport kernel_change_bound_check(const System& system, const Vector& w0,
                                             double radius, Index probe_points,
                                             std::uint64_t seed,
                                             const KernelChangeOptions& options) {
  require(probe_points >= 1, "kernel_change_bound_check: need at least one probe point");
  require(radius > 0.0, "kernel_change_bound_check: radius must be positive");
  Rng rng(seed);
  std::vector<Vector> probes;
  for (Index k = 0; k < probe_points; ++k) probes.push_back(rng.in_ball(w0, radius));

  EstimateOptions eopts;
  eopts.samples = std::max<Index>(options.constant_samples, 2);
  eopts.seed = derive_seed(seed, 1);
  eopts.safety_factor = options.safety_factor;
  eopts.extra_points = probes;
  const ConstantsEstimate est = estimate_constants(system, w0, radius, eopts);
  return kernel_change_report(system, w0, radius, probes, est.lipschitz,
                              options.safety_factor * est.max_hessian_norm);
}

std::pair<double, Vector> loss_hessian_min_eigen(const System& system, const Vector& w,
                                                 const Vector& targets, Index dense_limit,
                                                 double tolerance, const Vector* start) {
  const LossHessianOperator hl(system, w, targets);
  Vector v;
  if (hl.dim() <= dense_limit) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hl.dense());
    v = solver.eigenvectors().col(0);
  } else {
    const linalg::Extremes e = linalg::lanczos([&hl](const Vector& u) { return hl.apply(u); },
                                               hl.dim(), tolerance, 0, 0, start);
    v = e.min_vector;
  }
  v.normalize();
  // Report the Rayleigh quotient itself: a negative value certifies a
  // negative eigenvalue regardless of solver accuracy.
  return {v.dot(hl.apply(v)), v};
}

CurvatureProbeResult nonconvexity_probe(const System& system, const Vector& w_star,
                                        const Vector& targets, const std::vector<double>& radii,
                                        const ProbeOptions& options) {
  system.check_params(w_star);
  system.require_second_order();
  require(!radii.empty(), "nonconvexity_probe: need at least one radius");
  for (double r : radii) require(r > 0.0, "nonconvexity_probe: radii must be positive");
  require(options.directions_per_radius >= 1, "nonconvexity_probe: need at least one direction");
  const double loss = systems::square_loss(system, w_star, targets);
  if (!(loss <= options.interpolation_tolerance)) {
    throw PreconditionError("nonconvexity_probe: w_star is not near-interpolating (L = " +
                            std::to_string(loss) + " > " +
                            std::to_string(options.interpolation_tolerance) + ")");
  }

  const Index m = system.num_params();
  // Rounding in H_L u is about eps ||J||_F^2, so only values below this
  // threshold count as negative curvature.
  const double threshold =
      options.negative_tolerance * std::max(system.jacobian(w_star).squaredNorm(), 1e-300);
  Rng rng(options.seed);
  CurvatureProbeResult result;
  result.probe_radii = radii;
  std::vector<Vector> warm;
  for (double radius : radii) {
    RadiusOutcome outcome;
    outcome.radius = radius;
    outcome.curvature = std::numeric_limits<double>::infinity();
    std::vector<Vector> directions = warm;
    for (Index k = 0; k < options.directions_per_radius; ++k) directions.push_back(rng.unit_vector(m));
    const Vector* start = warm.size() > 1 ? &warm[1] : nullptr;

    bool done = false;
    for (const auto& d : directions) {
      for (double side : {1.0, -1.0}) {
        const Vector delta = side * radius * d;
        auto [curv, v] = loss_hessian_min_eigen(system, w_star + delta, targets, options.dense_limit,
                                                options.lanczos_tolerance, start);
        ++outcome.offsets_tried;
        if (curv < outcome.curvature) {
          outcome.curvature = curv;
          outcome.witness_delta = delta;
          outcome.witness_direction = v;
        }
        if (curv < -threshold) {
          outcome.found_negative = true;
          if (options.stop_at_first) {
            done = true;
            break;
          }
        }
      }
      if (done) break;
    }

    if (outcome.witness_delta.size() > 0) {
      warm = {outcome.witness_delta.normalized(), outcome.witness_direction};
    }
    if (outcome.found_negative && !result.found_negative) {
      result.found_negative = true;
      result.witness_delta = outcome.witness_delta;
      result.witness_direction = outcome.witness_direction;
      result.curvature = outcome.curvature;
    }
    result.per_radius.push_back(std::move(outcome));
  }
  if (!result.found_negative && !result.per_radius.empty()) {
    // Report the least positive curvature seen so callers can inspect it.
    const auto best = std::min_element(
        result.per_radius.begin(), result.per_radius.end(),
        [](const RadiusOutcome& a, const RadiusOutcome& b) { return a.curvature < b.curvature; });
    result.curvature = best->curvature;
    result.witness_delta = best->witness_delta;
    result.witness_direction = best->witness_direction;
  }
  return result;
}

}  // namespace ntkcond

#ifndef NTKCOND_HESSIAN_HPP
#define NTKCOND_HESSIAN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ntkcond/system.hpp"

namespace ntkcond {

struct HessianNormEstimate {
  Vector per_output_norms;
  double tensor_norm = 0.0;
  std::string method;  // "dense" | "power"
  Index iterations_used = 0;
  Vector residuals;
  bool converged = true;
};

struct HessianNormOptions {
  /// Build each H_i densely when m <= dense_limit.
  Index dense_limit = 256;
  double tolerance = 1e-8;
  Index max_iterations = 2000;
  std::uint64_t seed = 0;
  /// Take System::output_hessian_norm when every output provides it
  /// (method "structured"); false forces the dense/power paths.
  bool use_structure = true;
};

/// ||H|| = max_i ||H_i||_2. The power path iterates on H_i^2 (two products
/// per step) because H_i is indefinite.
HessianNormEstimate hessian_tensor_norm(const System& system, const Vector& w,
                                        const HessianNormOptions& options = {});

/// Dense m x m Hessian of output i assembled from output_hvp.
Matrix dense_output_hessian(const System& system, const Vector& w, Index i);

struct KernelChangeReport {
  double epsilon = 0.0;
  double lipschitz = 0.0;
  double hessian_norm = 0.0;
  double radius = 0.0;
  std::vector<double> changes;  // ||K(w) - K(w0)||_2 per probe point
  std::vector<bool> passed;
  bool all_passed = true;
};

/// Checks ||K(w) - K(w0)||_2 <= 2 L_F sqrt(n) R sup||H|| at the given points
/// with caller-supplied constants.
KernelChangeReport kernel_change_report(const System& system, const Vector& w0, double radius,
                                        const std::vector<Vector>& points, double lipschitz,
                                        double hessian_norm);

struct KernelChangeOptions {
  Index constant_samples = 64;
  double safety_factor = 1.1;
};

/// Samples probe_points points in B(w0, R), estimates L_F and sup||H|| over
/// the ball (probe points included) and reports each measured change.
KernelChangeReport kernel_change_bound_check(const System& system, const Vector& w0,
                                             double radius, Index probe_points,
                                             std::uint64_t seed,
                                             const KernelChangeOptions& options = {});

struct RadiusOutcome {
  double radius = 0.0;
  bool found_negative = false;
  double curvature = 0.0;  // most negative lambda_min seen at this radius
  Vector witness_delta;
  Vector witness_direction;
  Index offsets_tried = 0;
};

struct CurvatureProbeResult {
  bool found_negative = false;
  Vector witness_delta;
  Vector witness_direction;
  double curvature = 0.0;
  std::vector<double> probe_radii;
  std::vector<RadiusOutcome> per_radius;
};

struct ProbeOptions {
  Index directions_per_radius = 32;
  std::uint64_t seed = 0;
  /// L(w*) above this is rejected.
  double interpolation_tolerance = 1e-8;
  /// Dense loss-Hessian eigensolve when m <= dense_limit, Lanczos otherwise.
  Index dense_limit = 256;
  double lanczos_tolerance = 1e-10;
  /// Curvature must fall below -negative_tolerance ||J(w*)||_F^2 to count.
  double negative_tolerance = 1e-12;
  /// Stop a radius at its first negative witness.
  bool stop_at_first = true;
};

/// Searches offsets w* +/- delta, ||delta|| = radius, for negative curvature
/// of the square-loss Hessian. Directions: random unit vectors plus the
/// eigenvector found at the previous radius.
CurvatureProbeResult nonconvexity_probe(const System& system, const Vector& w_star,
                                        const Vector& targets, const std::vector<double>& radii,
                                        const ProbeOptions& options = {});

/// lambda_min(H_L(w)) with its eigenvector (dense or Lanczos by m).
std::pair<double, Vector> loss_hessian_min_eigen(const System& system, const Vector& w,
                                                 const Vector& targets, Index dense_limit = 256,
                                                 double tolerance = 1e-10,
                                                 const Vector* start = nullptr);

}  // namespace ntkcond

#endif  // NTKCOND_HESSIAN_HPP

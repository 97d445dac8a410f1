#ifndef NTKCOND_OPTIMIZE_HPP
#define NTKCOND_OPTIMIZE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ntkcond/conditioning.hpp"
#include "ntkcond/system.hpp"

namespace ntkcond {

enum class Provenance { kThm42c, kCor51, kUser };
std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& s);

struct GdPrescription {
  double step = 0.0;
  double radius = 0.0;
  double mu = 0.0;
  Provenance provenance = Provenance::kUser;
  double lipschitz = 0.0;
  double smoothness = 0.0;
  double residual_norm = 0.0;
  /// Fixed-point rounds used by prescribe_gd_auto, and whether R settled.
  Index rounds = 0;
  bool radius_stable = true;
};

/// eta = 1 / (L_F^2 + beta_F ||r0||), R = 2 L_F ||r0|| / mu.
GdPrescription prescribe_thm42c(double lipschitz, double smoothness, double residual_norm,
                                double mu);

/// eta = 2 sqrt(n) L_F^2 / (2 sqrt(n) L_F^4 + (lambda_min(K0) - mu) mu), with
/// the same radius as prescribe_thm42c. Requires 0 < mu < lambda_min(K0).
GdPrescription prescribe_cor51(double lipschitz, Index n, double lambda_min_k0, double mu,
                               double residual_norm);

/// Thm 4.2(c) prescription from an existing constants estimate.
GdPrescription prescribe_gd(const System& system, const Vector& w0, const Vector& targets,
                            const ConstantsEstimate& constants, double mu);

struct AutoPrescribeOptions {
  Index samples = 64;
  std::uint64_t seed = 0;
  double safety_factor = 1.1;
  Index max_rounds = 5;
  double radius_tolerance = 0.05;
  /// Starting ball; defaults to 2 ||J(w0)|| ||r0|| / mu.
  std::optional<double> initial_radius;
};

/// Fixed point between the radius and the constants estimated on that radius.
GdPrescription prescribe_gd_auto(const System& system, const Vector& w0, const Vector& targets,
                                 double mu, const AutoPrescribeOptions& options = {});

struct TrajectoryRecord {
  Index t = 0;
  double loss = 0.0;
  double dist_from_init = 0.0;
  double grad_norm = 0.0;
  std::optional<double> lambda_min_k;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  Vector final_w;
  bool converged = false;
  /// "converged" | "max_iters" | "diverged"
  std::string stop_reason;
  Index iterations = 0;
};

/// Loss above this (or non-finite) stops a run as diverged.
inline constexpr double kDivergenceLoss = 1e12;

struct GdOptions {
  Index max_iters = 100000;
  /// Stop once L(w_t) <= loss_tol. Negative disables early stopping.
  double loss_tol = 1e-4;
  /// Record every k-th iterate (the first and last are always recorded).
  Index record_stride = 1;
  /// Record lambda_min(K(w_t)) every k-th iterate; 0 disables.
  Index kernel_stride = 0;
  /// Called with (t, w_t) for every iterate, t = 0 included.
  std::function<void(Index, const Vector&)> observer;
};

/// w_{t+1} = w_t - eta J(w_t)^T (F(w_t) - y).
Trajectory run_gd(const System& system, const Vector& w0, const Vector& targets, double eta,
                  const GdOptions& options = {});

struct GaussNewtonOptions {
  Index max_iters = 200;
  double loss_tol = 1e-12;
  double damping = 1e-3;
};

/// Damped Gauss-Newton in output space, w <- w - J^T (J J^T + lambda I)^{-1} r,
/// with lambda adapted on acceptance. Used to reach near-interpolating points
/// when the kernel is too ill-conditioned for plain GD to get there.
Trajectory run_gauss_newton(const System& system, const Vector& w0, const Vector& targets,
                            const GaussNewtonOptions& options = {});

struct SgdPrescription {
  double step = 0.0;
  double radius = 0.0;
  /// Expected per-iteration contraction 1 - mu s eta / n.
  double rate = 0.0;
};

/// eta* = n mu / (n gamma (n^2 gamma + mu (s - 1))),
/// R = 2 n sqrt(2 gamma) sqrt(L0) / (mu delta).
SgdPrescription prescribe_sgd(Index n, double mu, double gamma, Index batch_size, double l0,
                              double delta);

struct SgdOptions {
  Index batch_size = 1;
  Index max_iters = 10000;
  double loss_tol = -1.0;
  std::uint64_t seed = 0;
  /// Full-batch loss is recorded every log_every iterations.
  Index log_every = 10;
  bool with_replacement = true;
};

/// w_{t+1} = w_t - eta sum_{i in S_t} grad l_i(w_t), |S_t| = s.
Trajectory run_sgd(const System& system, const Vector& w0, const Vector& targets, double eta,
                   const SgdOptions& options);

struct RateReport {
  bool holds = true;
  std::optional<Index> first_violation;
  /// loss_t / bound_t per checked record.
  std::vector<double> margins;
  double rate = 0.0;
};

/// Checks L(w_t) <= (1 - eta mu)^t L(w_0) (1 + 1e-9) at every record.
RateReport verify_rate(const Trajectory& trajectory, double eta, double mu);

/// Checks loss_k <= rate^{t_k} loss_0 * slack for a generic series.
RateReport verify_rate_series(const std::vector<Index>& t, const std::vector<double>& loss,
                              double rate, double slack);

/// min over records that carry lambda_min(K(w_t)).
std::optional<double> min_recorded_lambda(const Trajectory& trajectory);
double max_distance(const Trajectory& trajectory);

}  // namespace ntkcond

#endif  // NTKCOND_OPTIMIZE_HPP

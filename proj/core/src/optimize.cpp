#include "ntkcond/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "ntkcond/random.hpp"

namespace ntkcond {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kThm42c:
      return "thm4.2c";
    case Provenance::kCor51:
      return "cor5.1";
    case Provenance::kUser:
      return "user";
  }
  return "user";
}

Provenance parse_provenance(const std::string& s) {
  if (s == "thm4.2c") return Provenance::kThm42c;
  if (s == "cor5.1") return Provenance::kCor51;
  if (s == "user") return Provenance::kUser;
  throw ContractError("unknown step provenance '" + s + "'");
}

GdPrescription prescribe_thm42c(double lipschitz, double smoothness, double residual_norm,
                                double mu) {
  require(mu > 0.0, "prescribe_gd: mu must be positive");
  require(lipschitz > 0.0, "prescribe_gd: L_F must be positive");
  require(smoothness >= 0.0 && residual_norm >= 0.0,
          "prescribe_gd: beta_F and ||F(w0) - y|| must be nonnegative");
  GdPrescription p;
  p.step = 1.0 / (lipschitz * lipschitz + smoothness * residual_norm);
  p.radius = 2.0 * lipschitz * residual_norm / mu;
  p.mu = mu;
  p.provenance = Provenance::kThm42c;
  p.lipschitz = lipschitz;
  p.smoothness = smoothness;
  p.residual_norm = residual_norm;
  return p;
}

GdPrescription prescribe_cor51(double lipschitz, Index n, double lambda_min_k0, double mu,
                               double residual_norm) {
  require(lipschitz > 0.0, "prescribe_cor51: L_F must be positive");
  require(n >= 1, "prescribe_cor51: n must be positive");
  require(mu > 0.0, "prescribe_cor51: mu must be positive");
  if (!(mu < lambda_min_k0)) {
    throw ContractError("prescribe_cor51: mu must be below lambda_min(K(w0))");
  }
  const double rn = std::sqrt(static_cast<double>(n));
  const double l2 = lipschitz * lipschitz;
  GdPrescription p;
  p.step = 2.0 * rn * l2 / (2.0 * rn * l2 * l2 + (lambda_min_k0 - mu) * mu);
  p.radius = 2.0 * lipschitz * residual_norm / mu;
  p.mu = mu;
  p.provenance = Provenance::kCor51;
  p.lipschitz = lipschitz;
  p.residual_norm = residual_norm;
  return p;
}

GdPrescription prescribe_gd(const System& system, const Vector& w0, const Vector& targets,
                            const ConstantsEstimate& constants, double mu) {
  system.check_params(w0);
  require(targets.size() == system.num_outputs(), "prescribe_gd: targets have wrong length");
  const double r0 = (system.evaluate(w0) - targets).norm();
  return prescribe_thm42c(constants.lipschitz, constants.smoothness, r0, mu);
}

GdPrescription prescribe_gd_auto(const System& system, const Vector& w0, const Vector& targets,
                                 double mu, const AutoPrescribeOptions& options) {
  system.check_params(w0);
  require(mu > 0.0, "prescribe_gd_auto: mu must be positive");
  require(options.max_rounds >= 1, "prescribe_gd_auto: need at least one round");
  const double r0 = (system.evaluate(w0) - targets).norm();
  double radius = options.initial_radius.value_or(0.0);
  if (radius <= 0.0) {
    const TangentKernel k = tangent_kernel(system, w0);
    radius = 2.0 * std::sqrt(std::max(k.lambda_max, 0.0)) * r0 / mu;
  }
  require(radius > 0.0, "prescribe_gd_auto: starting radius must be positive");

  EstimateOptions eopts;
  eopts.samples = options.samples;
  eopts.seed = options.seed;
  eopts.safety_factor = options.safety_factor;
  eopts.targets = targets;
  GdPrescription p;
  for (Index round = 1; round <= options.max_rounds; ++round) {
    const ConstantsEstimate est = estimate_constants(system, w0, radius, eopts);
    p = prescribe_thm42c(est.lipschitz, est.smoothness, r0, mu);
    p.rounds = round;
    p.radius_stable = std::abs(p.radius - radius) <= options.radius_tolerance * radius;
    if (p.radius_stable) break;
    radius = p.radius;
  }
  return p;
}

namespace {

bool diverged(double loss) { return !std::isfinite(loss) || loss > kDivergenceLoss; }

}  // namespace

Trajectory run_gd(const System& system, const Vector& w0, const Vector& targets, double eta,
                  const GdOptions& options) {
  system.check_params(w0);
  require(targets.size() == system.num_outputs(), "run_gd: targets have wrong length");
  require(eta > 0.0, "run_gd: step size must be positive");
  require(options.max_iters >= 0, "run_gd: max_iters must be nonnegative");
  require(options.record_stride >= 1, "run_gd: record_stride must be positive");

  Trajectory traj;
  Vector w = w0;
  Vector last_good = w0;
  for (Index t = 0;; ++t) {
    const Vector r = system.evaluate(w) - targets;
    const double loss = 0.5 * r.squaredNorm();
    if (diverged(loss)) {
      traj.stop_reason = "diverged";
      traj.iterations = t;
      if (std::isfinite(loss)) {
        traj.records.push_back({t, loss, (w - w0).norm(), std::nan(""), std::nullopt});
      }
      traj.final_w = std::isfinite(loss) ? w : last_good;
      return traj;
    }
    if (options.observer) options.observer(t, w);
    const Vector g = system.vjp(w, r);
    const bool done = options.loss_tol >= 0.0 && loss <= options.loss_tol;
    const bool last = done || t == options.max_iters;
    if (t % options.record_stride == 0 || last) {
      TrajectoryRecord rec{t, loss, (w - w0).norm(), g.norm(), std::nullopt};
      if (options.kernel_stride > 0 && (t % options.kernel_stride == 0 || last)) {
        rec.lambda_min_k = tangent_kernel(system, w).lambda_min;
      }
      traj.records.push_back(rec);
    }
    if (last) {
      traj.converged = done;
      traj.stop_reason = done ? "converged" : "max_iters";
      traj.iterations = t;
      traj.final_w = w;
      return traj;
    }
    last_good = w;
    w -= eta * g;
  }
}

Trajectory run_gauss_newton(const System& system, const Vector& w0, const Vector& targets,
                            const GaussNewtonOptions& options) {
  system.check_params(w0);
  require(targets.size() == system.num_outputs(), "run_gauss_newton: targets have wrong length");
  require(options.damping > 0.0, "run_gauss_newton: damping must be positive");
  Trajectory traj;
  Vector w = w0;
  Vector r = system.evaluate(w) - targets;
  double loss = 0.5 * r.squaredNorm();
  double lambda = options.damping;
  const Index n = system.num_outputs();
  for (Index t = 0;; ++t) {
    const Matrix j = system.jacobian(w);
    traj.records.push_back({t, loss, (w - w0).norm(), (j.transpose() * r).norm(), std::nullopt});
    if (loss <= options.loss_tol || t == options.max_iters) {
      traj.converged = loss <= options.loss_tol;
      traj.stop_reason = traj.converged ? "converged" : "max_iters";
      traj.iterations = t;
      traj.final_w = w;
      return traj;
    }
    const Matrix k = j * j.transpose();
    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      const Matrix damped = k + lambda * k.diagonal().maxCoeff() * Matrix::Identity(n, n);
      const Vector step = j.transpose() * damped.ldlt().solve(r);
      const Vector trial = w - step;
      const Vector r_trial = system.evaluate(trial) - targets;
      const double l_trial = 0.5 * r_trial.squaredNorm();
      if (std::isfinite(l_trial) && l_trial < loss) {
        w = trial;
        r = r_trial;
        loss = l_trial;
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) {
      traj.stop_reason = "stalled";
      traj.iterations = t;
      traj.final_w = w;
      return traj;
    }
  }
}

SgdPrescription prescribe_sgd(Index n, double mu, double gamma, Index batch_size, double l0,
                              double delta) {
  require(n >= 1, "prescribe_sgd: n must be positive");
  if (batch_size < 1 || batch_size > n) {
    throw ContractError("prescribe_sgd: batch size must lie in [1, n]");
  }
  require(mu > 0.0 && gamma > 0.0 && delta > 0.0, "prescribe_sgd: mu, gamma, delta must be positive");
  require(l0 >= 0.0, "prescribe_sgd: L0 must be nonnegative");
  const double nn = static_cast<double>(n);
  const double s = static_cast<double>(batch_size);
  SgdPrescription p;
  p.step = nn * mu / (nn * gamma * (nn * nn * gamma + mu * (s - 1.0)));
  p.radius = 2.0 * nn * std::sqrt(2.0 * gamma) * std::sqrt(l0) / (mu * delta);
  p.rate = 1.0 - mu * s * p.step / nn;
  return p;
}

Trajectory run_sgd(const System& system, const Vector& w0, const Vector& targets, double eta,
                   const SgdOptions& options) {
  system.check_params(w0);
  const Index n = system.num_outputs();
  require(targets.size() == n, "run_sgd: targets have wrong length");
  require(eta > 0.0, "run_sgd: step size must be positive");
  if (options.batch_size < 1 || options.batch_size > n) {
    throw ContractError("run_sgd: batch size must lie in [1, n]");
  }
  require(options.log_every >= 1, "run_sgd: log_every must be positive");

  Rng rng(options.seed);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;

  Trajectory traj;
  Vector w = w0;
  Vector counts(n);
  for (Index t = 0;; ++t) {
    const bool log_now = t % options.log_every == 0 || t == options.max_iters;
    Vector r = system.evaluate(w) - targets;
    if (log_now) {
      const double loss = 0.5 * r.squaredNorm();
      if (diverged(loss)) {
        traj.stop_reason = "diverged";
        traj.iterations = t;
        if (std::isfinite(loss)) traj.records.push_back({t, loss, (w - w0).norm(), std::nan(""), std::nullopt});
        traj.final_w = w;
        return traj;
      }
      const bool done = options.loss_tol >= 0.0 && loss <= options.loss_tol;
      traj.records.push_back({t, loss, (w - w0).norm(), system.vjp(w, r).norm(), std::nullopt});
      if (done || t == options.max_iters) {
        traj.converged = done;
        traj.stop_reason = done ? "converged" : "max_iters";
        traj.iterations = t;
        traj.final_w = w;
        return traj;
      }
    } else if (!r.allFinite()) {
      traj.stop_reason = "diverged";
      traj.iterations = t;
      traj.final_w = w;
      return traj;
    }

    counts.setZero();
    if (options.with_replacement) {
      for (Index k = 0; k < options.batch_size; ++k) counts[rng.index(n)] += 1.0;
    } else {
      // Partial Fisher-Yates: the first s entries form a uniform subset.
      for (Index k = 0; k < options.batch_size; ++k) {
        const Index j = k + rng.index(n - k);
        std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(j)]);
        counts[perm[static_cast<std::size_t>(k)]] = 1.0;
      }
    }
    w -= eta * system.vjp(w, r.cwiseProduct(counts));
  }
}

RateReport verify_rate_series(const std::vector<Index>& t, const std::vector<double>& loss,
                              double rate, double slack) {
  require(t.size() == loss.size(), "verify_rate: series lengths differ");
  require(rate > 0.0 && rate <= 1.0, "verify_rate: rate must lie in (0, 1]");
  RateReport rep;
  rep.rate = rate;
  if (loss.empty()) return rep;
  const double l0 = loss.front();
  const double log_rate = std::log(rate);
  for (std::size_t k = 0; k < loss.size(); ++k) {
    const double bound = l0 * std::exp(static_cast<double>(t[k] - t.front()) * log_rate);
    rep.margins.push_back(bound > 0.0 ? loss[k] / bound : (loss[k] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
    if (!(loss[k] <= bound * slack) && rep.holds) {
      rep.holds = false;
      rep.first_violation = t[k];
    }
  }
  return rep;
}

RateReport verify_rate(const Trajectory& trajectory, double eta, double mu) {
  const double q = eta * mu;
  if (!(q > 0.0 && q < 1.0)) throw ContractError("verify_rate: need 0 < eta mu < 1");
  std::vector<Index> t;
  std::vector<double> loss;
  for (const auto& r : trajectory.records) {
    t.push_back(r.t);
    loss.push_back(r.loss);
  }
  RateReport rep = verify_rate_series(t, loss, 1.0 - q, 1.0 + 1e-9);
  rep.rate = 1.0 - q;
  return rep;
}

std::optional<double> min_recorded_lambda(const Trajectory& trajectory) {
  std::optional<double> out;
  for (const auto& r : trajectory.records) {
    if (r.lambda_min_k) out = out ? std::min(*out, *r.lambda_min_k) : *r.lambda_min_k;
  }
  return out;
}

double max_distance(const Trajectory& trajectory) {
  double d = 0.0;
  for (const auto& r : trajectory.records) d = std::max(d, r.dist_from_init);
  return d;
}

}  // namespace ntkcond

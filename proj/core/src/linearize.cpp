#include "ntkcond/linearize.hpp"

#include <algorithm>
#include <cmath>

#include "ntkcond/hessian.hpp"
#include "ntkcond/linear_system.hpp"

namespace ntkcond {

LinearizedSystem::LinearizedSystem(const System& system, const Vector& w0)
    : anchor_(w0), f0_(), j0_() {
  system.check_params(w0);
  f0_ = system.evaluate(w0);
  j0_ = system.jacobian(w0);
}

LinearizedSystem linearize_at(const System& system, const Vector& w0) {
  return LinearizedSystem(system, w0);
}

Condition17 condition17(double hessian_sup, double lipschitz, Index n, double radius, double mu,
                        double residual_norm, double epsilon) {
  require(lipschitz > 0.0 && radius > 0.0 && epsilon > 0.0,
          "condition17: L_F, R and epsilon must be positive");
  Condition17 c;
  c.lhs = hessian_sup;
  c.epsilon = epsilon;
  c.lipschitz = lipschitz;
  c.radius = radius;
  c.mu = mu;
  c.residual_norm = residual_norm;
  c.plain_rhs = epsilon / (2.0 * lipschitz * std::sqrt(static_cast<double>(n)) * radius);
  c.rhs = residual_norm > 0.0 ? c.plain_rhs * mu / residual_norm : c.plain_rhs;
  c.satisfied = c.lhs <= c.rhs;
  c.plain_satisfied = c.lhs <= c.plain_rhs;
  return c;
}

DivergenceReport compare_dynamics(const System& system, const Vector& w0, const Vector& targets,
                                  double eta, Index iters, const CompareOptions& options) {
  system.check_params(w0);
  require(targets.size() == system.num_outputs(), "compare_dynamics: targets have wrong length");
  require(eta > 0.0, "compare_dynamics: step size must be positive");
  require(iters >= 0, "compare_dynamics: iteration count must be nonnegative");

  // An affine system is its own linearization; reusing it keeps the two
  // tracks bitwise identical instead of differing by rounding.
  const bool affine = dynamic_cast<const LinearSystem*>(&system) != nullptr ||
                      dynamic_cast<const LinearizedSystem*>(&system) != nullptr;
  std::optional<LinearizedSystem> own;
  if (!affine) own.emplace(system, w0);
  const System& lin = affine ? system : static_cast<const System&>(*own);
  DivergenceReport rep;
  Vector w = w0;
  Vector wl = w0;
  Vector f = system.evaluate(w);
  Vector fl = lin.evaluate(wl);
  double travelled = 0.0;
  for (Index t = 0;; ++t) {
    rep.t.push_back(t);
    const double gap = (f - fl).norm();
    rep.gap.push_back(gap);
    rep.loss_nonlinear.push_back(0.5 * (f - targets).squaredNorm());
    rep.loss_linearized.push_back(0.5 * (fl - targets).squaredNorm());
    rep.sup_gap = std::max(rep.sup_gap, gap);
    travelled = std::max(travelled, (w - w0).norm());
    if (t == 0) rep.step_gap.push_back(0.0);
    if (t == iters || !f.allFinite()) break;

    w -= eta * system.vjp(w, f - targets);
    wl -= eta * lin.vjp(wl, fl - targets);
    const Vector f_next = system.evaluate(w);
    const Vector fl_next = lin.evaluate(wl);
    rep.step_gap.push_back(((f_next - f) - (fl_next - fl)).norm());
    f = f_next;
    fl = fl_next;
  }
  rep.final_w = w;
  rep.final_w_lin = wl;

  if (options.check_condition17 && system.second_order_supported()) {
    const double radius = options.radius.value_or(std::max(travelled, 1e-12));
    EstimateOptions eopts;
    eopts.samples = std::max<Index>(options.constant_samples, 2);
    eopts.seed = options.seed;
    eopts.safety_factor = options.safety_factor;
    const ConstantsEstimate est = estimate_constants(system, w0, radius, eopts);
    const double mu = options.mu.value_or(tangent_kernel(system, w0).lambda_min);
    const double r0 = (system.evaluate(w0) - targets).norm();
    rep.condition_17 = condition17(options.safety_factor * est.max_hessian_norm,
                                   std::max(est.lipschitz, 1e-300), system.num_outputs(), radius,
                                   mu, r0, options.epsilon);
  }
  return rep;
}

}  // namespace ntkcond

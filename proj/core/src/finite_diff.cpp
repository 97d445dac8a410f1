#include "ntkcond/finite_diff.hpp"

#include <algorithm>
#include <cmath>

namespace ntkcond::fd {

double step_for(double x, double absolute) {
  if (absolute > 0.0) return absolute;
  return std::max(1e-5 * std::abs(x), 1e-7);
}

Matrix jacobian(const System& system, const Vector& w, double absolute_step) {
  system.check_params(w);
  Matrix j(system.num_outputs(), system.num_params());
  Vector probe = w;
  for (Index k = 0; k < w.size(); ++k) {
    const double h = step_for(w[k], absolute_step);
    probe[k] = w[k] + h;
    const Vector plus = system.evaluate(probe);
    probe[k] = w[k] - h;
    const Vector minus = system.evaluate(probe);
    probe[k] = w[k];
    j.col(k) = (plus - minus) / (2.0 * h);
  }
  return j;
}

Matrix hessian_from_gradient(const std::function<Vector(const Vector&)>& grad, const Vector& w,
                             double absolute_step) {
  const Index m = w.size();
  Matrix h(m, m);
  Vector probe = w;
  for (Index k = 0; k < m; ++k) {
    const double step = step_for(w[k], absolute_step);
    probe[k] = w[k] + step;
    const Vector plus = grad(probe);
    probe[k] = w[k] - step;
    const Vector minus = grad(probe);
    probe[k] = w[k];
    h.col(k) = (plus - minus) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

Matrix output_hessian(const System& system, const Vector& w, Index i, double absolute_step) {
  system.check_params(w);
  require(i >= 0 && i < system.num_outputs(), "fd::output_hessian: output index out of range");
  return hessian_from_gradient([&](const Vector& p) { return system.gradient(p, i); }, w,
                               absolute_step);
}

Matrix loss_hessian(const System& system, const Vector& w, const Vector& targets,
                    double absolute_step) {
  system.check_params(w);
  require(targets.size() == system.num_outputs(), "fd::loss_hessian: targets have wrong length");
  return hessian_from_gradient(
      [&](const Vector& p) { return system.vjp(p, system.evaluate(p) - targets); }, w,
      absolute_step);
}

double max_relative_error(const Matrix& analytic, const Matrix& reference, double floor) {
  require(analytic.rows() == reference.rows() && analytic.cols() == reference.cols(),
          "fd::max_relative_error: shape mismatch");
  if (reference.size() == 0) return 0.0;
  if (floor < 0.0) floor = 1e-3 * reference.cwiseAbs().maxCoeff();
  if (floor == 0.0) floor = 1e-300;
  const Matrix denom = reference.cwiseAbs().cwiseMax(floor);
  return ((analytic - reference).cwiseAbs().array() / denom.array()).maxCoeff();
}

}  // namespace ntkcond::fd

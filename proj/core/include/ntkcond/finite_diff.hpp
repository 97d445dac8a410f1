#ifndef NTKCOND_FINITE_DIFF_HPP
#define NTKCOND_FINITE_DIFF_HPP

#include <functional>

#include "ntkcond/system.hpp"

namespace ntkcond::fd {

/// Central-difference step for coordinate value x: max(1e-5 |x|, 1e-7),
/// or a caller-fixed absolute step when `absolute` > 0.
double step_for(double x, double absolute = 0.0);

/// n x m central-difference Jacobian of system.evaluate.
Matrix jacobian(const System& system, const Vector& w, double absolute_step = 0.0);

/// Dense m x m central-difference Hessian of output i (differences of the
/// analytic gradient, so one level of truncation error).
Matrix output_hessian(const System& system, const Vector& w, Index i, double absolute_step = 0.0);

/// Dense Hessian of a scalar function via differences of a supplied gradient.
Matrix hessian_from_gradient(const std::function<Vector(const Vector&)>& grad, const Vector& w,
                             double absolute_step = 0.0);

/// Dense Hessian of 1/2 ||F(w) - y||^2 from differences of J^T r.
Matrix loss_hessian(const System& system, const Vector& w, const Vector& targets,
                    double absolute_step = 0.0);

/// max_ij |a_ij - b_ij| / max(|b_ij|, floor). floor defaults to 1e-3 max|b|.
double max_relative_error(const Matrix& analytic, const Matrix& reference, double floor = -1.0);

}  // namespace ntkcond::fd

#endif  // NTKCOND_FINITE_DIFF_HPP

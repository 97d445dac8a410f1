#ifndef NTKCOND_LINEARIZE_HPP
#define NTKCOND_LINEARIZE_HPP

#include <optional>
#include <vector>

#include "ntkcond/conditioning.hpp"
#include "ntkcond/system.hpp"

namespace ntkcond {

/// F_lin(w) = F(w0) + J0 (w - w0).
class LinearizedSystem final : public System {
 public:
  LinearizedSystem(const System& system, const Vector& w0);

  Index num_params() const override { return anchor_.size(); }
  Index num_outputs() const override { return f0_.size(); }
  std::string name() const override { return "linearized"; }

  Vector evaluate(const Vector& w) const override { return f0_ + j0_ * (w - anchor_); }
  Matrix jacobian(const Vector&) const override { return j0_; }
  Vector output_hvp(const Vector&, Index, const Vector&) const override {
    return Vector::Zero(num_params());
  }
  Vector weighted_hvp(const Vector&, const Vector&, const Vector&) const override {
    return Vector::Zero(num_params());
  }
  Vector vjp(const Vector&, const Vector& r) const override { return j0_.transpose() * r; }
  std::optional<double> output_hessian_norm(const Vector&, Index) const override { return 0.0; }
  Vector gradient(const Vector&, Index i) const override { return j0_.row(i).transpose(); }

  const Vector& anchor() const { return anchor_; }
  const Vector& f0() const { return f0_; }
  const Matrix& j0() const { return j0_; }

 private:
  Vector anchor_;
  Vector f0_;
  Matrix j0_;
};

LinearizedSystem linearize_at(const System& system, const Vector& w0);

struct Condition17 {
  bool satisfied = false;
  /// sup ||H|| over the ball (left side).
  double lhs = 0.0;
  /// eps / (2 L_F sqrt(n) R) * mu / ||F(w0) - y|| (right side).
  double rhs = 0.0;
  /// The weaker eps / (2 L_F sqrt(n) R) requirement.
  double plain_rhs = 0.0;
  bool plain_satisfied = false;
  double epsilon = 0.1;
  double lipschitz = 0.0;
  double radius = 0.0;
  double mu = 0.0;
  double residual_norm = 0.0;
};

/// Both sides of sup||H|| <= eps mu / (2 L_F sqrt(n) R ||F(w0) - y||).
Condition17 condition17(double hessian_sup, double lipschitz, Index n, double radius, double mu,
                        double residual_norm, double epsilon);

struct DivergenceReport {
  std::vector<Index> t;
  /// ||F(w_t) - F_lin(w_t^lin)||
  std::vector<double> gap;
  /// ||(F(w_{t+1}) - F(w_t)) - (F_lin(w_{t+1}^lin) - F_lin(w_t^lin))||, 0 at t = 0.
  std::vector<double> step_gap;
  std::vector<double> loss_nonlinear;
  std::vector<double> loss_linearized;
  double sup_gap = 0.0;
  std::optional<Condition17> condition_17;
  Vector final_w;
  Vector final_w_lin;
};

struct CompareOptions {
  double epsilon = 0.1;
  /// Evaluate condition 17 from sampled constants (needs second-order support).
  bool check_condition17 = true;
  Index constant_samples = 16;
  std::uint64_t seed = 0;
  double safety_factor = 1.1;
  /// Ball radius for the constants; defaults to the largest distance travelled
  /// by the non-linear run.
  std::optional<double> radius;
  /// mu for condition 17; defaults to lambda_min(K(w0)).
  std::optional<double> mu;
};

/// Runs GD with step eta on F and F_lin from w0 for exactly iters steps.
DivergenceReport compare_dynamics(const System& system, const Vector& w0, const Vector& targets,
                                  double eta, Index iters, const CompareOptions& options = {});

}  // namespace ntkcond

#endif  // NTKCOND_LINEARIZE_HPP

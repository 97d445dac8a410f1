#include <gtest/gtest.h>

#include "ntkcond/conditioning.hpp"
#include "ntkcond/optimize.hpp"
#include "support.hpp"

namespace ntkcond {
namespace {

using testing::mat;
using testing::vec;

TEST(Prescribe, Thm42cSubstitution) {
  const auto p = prescribe_thm42c(2, 1, 3, 1);
  EXPECT_DOUBLE_EQ(p.step, 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(p.radius, 12.0);
  EXPECT_EQ(p.provenance, Provenance::kThm42c);
  EXPECT_THROW(prescribe_thm42c(2, 1, 3, 0), ContractError);
}

TEST(Prescribe, LinearSystemGivesClassicalStep) {
  const LinearSystem s(mat({{1, 0}, {0, 2}}));
  ConstantsEstimate est = estimate_constants(s, vec({1, 1}), 1.0, {4, 0, 1.0, std::nullopt, {}});
  const auto p = prescribe_gd(s, vec({1, 1}), vec({0, 0}), est, 1.0);
  EXPECT_NEAR(p.step, 0.25, 1e-15);
  EXPECT_NEAR(p.step, 1.0 / tangent_kernel(s, vec({1, 1})).lambda_max, 1e-15);
}

TEST(Prescribe, Cor51Formula) {
  const double lf = 1.5, lam = 0.8, mu = 0.3;
  const Index n = 4;
  const auto p = prescribe_cor51(lf, n, lam, mu, 2.0);
  const double sn = std::sqrt(double(n));
  EXPECT_DOUBLE_EQ(p.step, 2 * sn * lf * lf / (2 * sn * std::pow(lf, 4) + (lam - mu) * mu));
  EXPECT_DOUBLE_EQ(p.radius, 2 * lf * 2.0 / mu);
  EXPECT_EQ(to_string(p.provenance), "cor5.1");
  EXPECT_THROW(prescribe_cor51(lf, n, lam, lam, 2.0), ContractError);
  EXPECT_THROW(prescribe_cor51(lf, n, lam, 0.0, 2.0), ContractError);
}

TEST(Prescribe, ProvenanceRoundTrip) {
  for (Provenance p : {Provenance::kThm42c, Provenance::kCor51, Provenance::kUser}) {
    EXPECT_EQ(parse_provenance(to_string(p)), p);
  }
}

TEST(Prescribe, AutoRadiusSettlesAndContainsPath) {
  // Targets near F(w0) keep R = 2 L_F ||r0|| / mu small enough to settle.
  testing::Case c = testing::spread_case(200);
  c.targets = c.system->evaluate(c.w) + 0.01 * Vector::LinSpaced(5, -1, 1);
  const double lam = tangent_kernel(*c.system, c.w).lambda_min;
  AutoPrescribeOptions ao;
  ao.samples = 8;
  const auto p = prescribe_gd_auto(*c.system, c.w, c.targets, lam / 2, ao);
  EXPECT_TRUE(p.radius_stable);
  EXPECT_LE(p.rounds, 5);
  EXPECT_GT(p.step, 0.0);
  GdOptions gd;
  gd.max_iters = 20000;
  gd.loss_tol = 1e-6;
  const Trajectory t = run_gd(*c.system, c.w, c.targets, p.step, gd);
  EXPECT_TRUE(t.converged);
  EXPECT_LE(max_distance(t), p.radius);
}

TEST(Gd, IdentityExactInOneStep) {
  const LinearSystem s(Matrix::Identity(2, 2));
  const Trajectory t = run_gd(s, vec({1, 0}), vec({0, 0}), 1.0, {10, 0.0, 1, 0, nullptr});
  ASSERT_GE(t.records.size(), 2u);
  EXPECT_EQ(t.records[1].loss, 0.0);
  EXPECT_EQ(t.stop_reason, "converged");
}

TEST(Gd, DiagonalRateHolds) {
  const LinearSystem s(mat({{1, 0}, {0, 2}}));
  GdOptions o;
  o.max_iters = 200;
  o.loss_tol = -1;
  o.kernel_stride = 1;
  const Trajectory t = run_gd(s, vec({1, 1}), vec({0, 0}), 0.25, o);
  const RateReport r = verify_rate(t, 0.25, 1.0);
  EXPECT_TRUE(r.holds);
  EXPECT_FALSE(r.first_violation);
  EXPECT_EQ(*min_recorded_lambda(t), 1.0);
  for (std::size_t k = 0; k < t.records.size(); ++k) EXPECT_EQ(t.records[k].t, Index(k));
}

TEST(Gd, MonotoneDescentAndBallContainmentUnderThm42c) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    testing::Case c = testing::spread_case(300, "tanh", seed);
    c.targets = c.system->evaluate(c.w) + 0.2 * Vector::LinSpaced(5, -1, 1);
    const double lam = tangent_kernel(*c.system, c.w).lambda_min;
    const auto cert = certify_ball(*c.system, c.w, 1.0, c.targets, {8, seed, {}, {}});
    ASSERT_GT(cert.mu_hat, 0.0);
    AutoPrescribeOptions ao;
    ao.samples = 8;
    const auto p = prescribe_gd_auto(*c.system, c.w, c.targets, lam / 2, ao);
    GdOptions o;
    o.max_iters = 30000;
    o.loss_tol = 1e-8;
    const Trajectory t = run_gd(*c.system, c.w, c.targets, p.step, o);
    for (std::size_t k = 1; k < t.records.size(); ++k) {
      EXPECT_LE(t.records[k].loss, t.records[k - 1].loss + 1e-12);
      EXPECT_LE(t.records[k].dist_from_init, p.radius);
    }
    // No solution is closer than ||r0|| / L_F.
    ASSERT_TRUE(t.converged);
    {
      const double r0 = (c.system->evaluate(c.w) - c.targets).norm();
      EXPECT_GE(max_distance(t), t.records.back().dist_from_init);
      EXPECT_GE(t.records.back().dist_from_init + std::sqrt(2 * o.loss_tol) / p.lipschitz,
                r0 / p.lipschitz - 1e-8);
    }
  }
}

TEST(Gd, HalvingStepBarelyMovesLimit) {
  const testing::Case c = testing::spread_case(200);
  const double eta = 1.0 / tangent_kernel(*c.system, c.w).lambda_max;
  GdOptions o;
  o.max_iters = 200000;
  o.loss_tol = 1e-10;
  const Trajectory a = run_gd(*c.system, c.w, c.targets, eta, o);
  const Trajectory b = run_gd(*c.system, c.w, c.targets, eta / 2, o);
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_LE((b.final_w - c.w).norm(), 1.1 * (a.final_w - c.w).norm());
}

TEST(Gd, DivergenceTruncates) {
  const LinearSystem s(mat({{1, 0}, {0, 100}}));
  const Trajectory t = run_gd(s, vec({1, 1}), vec({0, 0}), 0.05, {1000, 1e-8, 1, 0, nullptr});
  EXPECT_EQ(t.stop_reason, "diverged");
  EXPECT_LT(t.iterations, 1000);
  EXPECT_THROW(run_gd(s, vec({1, 1}), vec({0, 0}), -1.0), ContractError);
}

TEST(Gd, DeterministicAndObserved) {
  const testing::Case c = testing::shallow_case(50, 5, "tanh");
  Index calls = 0;
  GdOptions o;
  o.max_iters = 30;
  o.loss_tol = -1;
  o.observer = [&](Index t, const Vector&) { EXPECT_EQ(t, calls++); };
  const Trajectory a = run_gd(*c.system, c.w, c.targets, 0.1, o);
  o.observer = nullptr;
  const Trajectory b = run_gd(*c.system, c.w, c.targets, 0.1, o);
  EXPECT_EQ(calls, 31);
  EXPECT_EQ(a.final_w, b.final_w);
}

TEST(VerifyRate, FindsInjectedSpike) {
  const LinearSystem s(mat({{1, 0}, {0, 2}}));
  GdOptions o;
  o.max_iters = 20;
  o.loss_tol = -1;
  Trajectory t = run_gd(s, vec({1, 1}), vec({0, 0}), 0.25, o);
  t.records[7].loss = 10 * t.records[0].loss;
  const RateReport r = verify_rate(t, 0.25, 1.0);
  EXPECT_FALSE(r.holds);
  ASSERT_TRUE(r.first_violation);
  EXPECT_EQ(*r.first_violation, 7);
  EXPECT_THROW(verify_rate(t, 1.0, 1.0), ContractError);
}

TEST(Sgd, PrescriptionSubstitutions) {
  EXPECT_DOUBLE_EQ(prescribe_sgd(2, 1, 1, 1, 2, 0.5).step, 0.25);
  EXPECT_DOUBLE_EQ(prescribe_sgd(2, 1, 1, 2, 2, 0.5).step, 0.2);
  EXPECT_DOUBLE_EQ(prescribe_sgd(2, 1, 1, 1, 2, 0.5).radius, 16.0);
  EXPECT_DOUBLE_EQ(prescribe_sgd(2, 1, 1, 2, 2, 0.5).rate, 1 - 1 * 2 * 0.2 / 2);
  EXPECT_THROW(prescribe_sgd(2, 1, 1, 3, 2, 0.5), ContractError);
  EXPECT_THROW(prescribe_sgd(2, 1, 1, 0, 2, 0.5), ContractError);
}

TEST(Sgd, FullBatchWithoutReplacementIsGd) {
  const testing::Case c = testing::shallow_case(40, 5, "tanh");
  SgdOptions so;
  so.batch_size = 5;
  so.max_iters = 50;
  so.log_every = 1;
  so.with_replacement = false;
  const Trajectory s = run_sgd(*c.system, c.w, c.targets, 0.1, so);
  const Trajectory g = run_gd(*c.system, c.w, c.targets, 0.1, {50, -1, 1, 0, nullptr});
  EXPECT_LT((s.final_w - g.final_w).norm(), 1e-12);
}

TEST(Sgd, SameSeedSameTrajectory) {
  const LinearSystem s(mat({{1, 0.5}, {0, 1}, {1, 1}}));
  SgdOptions so;
  so.batch_size = 2;
  so.max_iters = 100;
  so.seed = 9;
  const Trajectory a = run_sgd(s, vec({1, -1}), vec({0, 0, 0}), 0.05, so);
  const Trajectory b = run_sgd(s, vec({1, -1}), vec({0, 0, 0}), 0.05, so);
  EXPECT_EQ(a.final_w, b.final_w);
  so.seed = 10;
  EXPECT_NE(run_sgd(s, vec({1, -1}), vec({0, 0, 0}), 0.05, so).final_w, a.final_w);
  // Logged every 10 iterations plus the endpoints.
  EXPECT_EQ(a.records.front().t, 0);
  EXPECT_EQ(a.records[1].t, 10);
}

TEST(Sgd, IdentityMeanLossWithinRate) {
  const LinearSystem s(Matrix::Identity(2, 2));
  const Vector w0 = vec({1, -2});
  const Vector y = vec({0, 0});
  for (Index bs : {1, 2}) {
    const auto p = prescribe_sgd(2, 1.0, 1.0, bs, 0.5 * w0.squaredNorm(), 0.5);
    std::vector<double> mean;
    std::vector<Index> ts;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SgdOptions so;
      so.batch_size = bs;
      so.max_iters = 60;
      so.seed = seed;
      const Trajectory t = run_sgd(s, w0, y, p.step, so);
      if (mean.empty()) {
        mean.assign(t.records.size(), 0.0);
        for (const auto& r : t.records) ts.push_back(r.t);
      }
      for (std::size_t k = 0; k < t.records.size(); ++k) mean[k] += t.records[k].loss / 20;
    }
    EXPECT_TRUE(verify_rate_series(ts, mean, p.rate, 1.5).holds) << bs;
  }
}

TEST(GaussNewton, ReachesInterpolation) {
  const testing::Case c = testing::shallow_case(100, 20, "tanh");
  const Trajectory t = run_gauss_newton(*c.system, c.w, c.targets);
  EXPECT_TRUE(t.converged);
  EXPECT_LE(t.records.back().loss, 1e-12);
  EXPECT_NEAR((c.system->evaluate(t.final_w) - c.targets).squaredNorm() / 2, t.records.back().loss, 1e-15);
}

}  // namespace
}  // namespace ntkcond

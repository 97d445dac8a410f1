#include <gtest/gtest.h>

#include "ntkcond/conditioning.hpp"
#include "ntkcond/linearize.hpp"
#include "support.hpp"

namespace ntkcond {
namespace {

using testing::mat;
using testing::vec;

TEST(Linearize, LinearSystemIsItsOwnLinearization) {
  const LinearSystem s(mat({{1, 2}, {3, -1}, {0, 1}}));
  const LinearizedSystem lin = linearize_at(s, vec({0.5, -0.2}));
  Rng rng(1);
  for (int k = 0; k < 20; ++k) {
    const Vector w = rng.normal_vector(2);
    EXPECT_LT((lin.evaluate(w) - s.evaluate(w)).norm(), 1e-13);
  }
}

TEST(Linearize, AnchorAndConstantKernel) {
  const testing::Case c = testing::shallow_case(20, 4, "tanh");
  const LinearizedSystem lin = linearize_at(*c.system, c.w);
  EXPECT_EQ(lin.evaluate(c.w), c.system->evaluate(c.w));
  const Matrix k0 = tangent_kernel(*c.system, c.w).matrix;
  Rng rng(2);
  const Vector w = c.w + rng.normal_vector(c.w.size());
  EXPECT_LT((tangent_kernel(lin, w).matrix - k0).norm(), 1e-12 * k0.norm());
}

TEST(Linearize, QuadraticRemainderIsExact) {
  const QuadraticSystem q = QuadraticSystem::random(3, 5, 1.0, 4);
  Rng rng(5);
  const Vector w0 = rng.normal_vector(5);
  const LinearizedSystem lin = linearize_at(q, w0);
  for (int k = 0; k < 10; ++k) {
    const Vector u = rng.normal_vector(5);
    const Vector rem = q.evaluate(w0 + u) - lin.evaluate(w0 + u);
    for (Index i = 0; i < 3; ++i) {
      EXPECT_NEAR(rem(i), 0.5 * u.dot(q.hessian(i) * u), 1e-12 * (1 + u.squaredNorm()));
    }
  }
}

TEST(CompareDynamics, LinearGapIsIdenticallyZero) {
  const LinearSystem s(mat({{1, 0, 1}, {0, 2, 0}}));
  const auto rep = compare_dynamics(s, vec({1, 1, 1}), vec({0, 1}), 0.1, 100);
  EXPECT_EQ(rep.sup_gap, 0.0);
  for (double g : rep.gap) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(rep.t.size(), 101u);
}

TEST(CompareDynamics, SeriesInvariants) {
  const testing::Case c = testing::shallow_case(50, 6, "tanh");
  const double eta = 1.0 / tangent_kernel(*c.system, c.w).lambda_max;
  const auto rep = compare_dynamics(*c.system, c.w, c.targets, eta, 300);
  ASSERT_EQ(rep.gap.size(), 301u);
  EXPECT_EQ(rep.gap.front(), 0.0);
  EXPECT_EQ(rep.step_gap.front(), 0.0);
  EXPECT_EQ(rep.sup_gap, *std::max_element(rep.gap.begin(), rep.gap.end()));
  for (double g : rep.gap) EXPECT_TRUE(std::isfinite(g));
  ASSERT_TRUE(rep.condition_17);
}

TEST(CompareDynamics, LinearizedIterateMatchesClosedForm) {
  // w_t - w0 = -eta sum_{k<t} (I - eta J^T J)^k J^T r0.
  const testing::Case c = testing::shallow_case(40, 5, "tanh");
  const Matrix j = c.system->jacobian(c.w);
  const Vector r0 = c.system->evaluate(c.w) - c.targets;
  const double eta = 0.5 / tangent_kernel(*c.system, c.w).lambda_max;
  const Index iters = 50;
  CompareOptions o;
  o.check_condition17 = false;
  const auto rep = compare_dynamics(*c.system, c.w, c.targets, eta, iters, o);
  const Matrix a = Matrix::Identity(j.cols(), j.cols()) - eta * j.transpose() * j;
  Vector step = j.transpose() * r0;
  Vector sum = Vector::Zero(j.cols());
  for (Index k = 0; k < iters; ++k) {
    sum += step;
    step = a * step;
  }
  const Vector expect = c.w - eta * sum;
  EXPECT_LT((rep.final_w_lin - expect).norm(), 1e-8 * (expect - c.w).norm());
}

TEST(CompareDynamics, GapShrinksWithWidthForLinearOutput) {
  std::vector<double> gaps;
  for (Index m : {100, 1000, 10000}) {
    const testing::Case c = testing::shallow_case(m, 20, "tanh");
    const double eta = 1.0 / tangent_kernel(*c.system, c.w).lambda_max;
    CompareOptions o;
    o.check_condition17 = false;
    gaps.push_back(compare_dynamics(*c.system, c.w, c.targets, eta, 300, o).sup_gap);
  }
  EXPECT_GT(gaps[0], gaps[1]);
  EXPECT_GT(gaps[1], gaps[2]);
}

TEST(Condition17, BothSidesAndImplication) {
  const auto c = condition17(0.01, 2.0, 4, 1.0, 0.5, 2.0, 0.1);
  EXPECT_DOUBLE_EQ(c.plain_rhs, 0.1 / (2 * 2.0 * 2.0 * 1.0));
  EXPECT_DOUBLE_EQ(c.rhs, c.plain_rhs * 0.5 / 2.0);
  EXPECT_EQ(c.satisfied, 0.01 <= c.rhs);
  EXPECT_EQ(c.plain_satisfied, 0.01 <= c.plain_rhs);
  Rng rng(7);
  for (int k = 0; k < 500; ++k) {
    const double r0 = rng.uniform(0.1, 5);
    const double mu = rng.uniform(0.0, 0.999) * r0;
    const auto d = condition17(rng.uniform(0, 0.05), rng.uniform(0.1, 3), 5, rng.uniform(0.1, 2), mu, r0, 0.1);
    if (d.satisfied) EXPECT_TRUE(d.plain_satisfied);
  }
}

}  // namespace
}  // namespace ntkcond

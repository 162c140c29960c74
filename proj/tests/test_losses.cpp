#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gexp/losses.hpp"
#include "oracles.hpp"

using gexp::Index;
using gexp::Vector;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

}  // namespace

TEST(CheckLoss, Examples) {
  EXPECT_DOUBLE_EQ(gexp::check_loss(0.5, -2.0), 1.0);
  EXPECT_NEAR(gexp::check_loss(0.9, -2.0), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(gexp::check_loss(0.9, 0.0), 0.0);
  EXPECT_NEAR(gexp::check_loss(0.9, 3.0), 2.7, 1e-15);
}

TEST(CheckLoss, RejectsLevelOutsideUnitInterval) {
  EXPECT_THROW(gexp::check_loss(0.0, 1.0), std::domain_error);
  EXPECT_THROW(gexp::check_loss(1.0, 1.0), std::domain_error);
  EXPECT_THROW(gexp::expectile_loss_1d(1.5, 1.0), std::domain_error);
  EXPECT_THROW(gexp::check_loss(0.5, std::nan("")), std::invalid_argument);
}

TEST(ExpectileLoss1d, ExamplesAndEquivalentForm) {
  EXPECT_DOUBLE_EQ(gexp::expectile_loss_1d(0.5, 2.0), 2.0);
  EXPECT_NEAR(gexp::expectile_loss_1d(0.9, -2.0), 0.4, 1e-15);
  EXPECT_NEAR(gexp::expectile_loss_1d_symmetric(0.9, -2.0), 0.4, 1e-15);

  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> level(0.001, 0.999);
  std::normal_distribution<double> nd(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = level(gen);
    const double t = nd(gen);
    EXPECT_NEAR(gexp::expectile_loss_1d(a, t), gexp::expectile_loss_1d_symmetric(a, t),
                1e-12 * (1.0 + t * t));
  }
}

TEST(PhiLoss, Examples) {
  EXPECT_DOUBLE_EQ(gexp::phi_loss(Index::zero(2), vec({3, 4})), 2.5);
  EXPECT_DOUBLE_EQ(gexp::phi_loss(Index(vec({0.5, 0})), vec({1, 0})), 0.75);
  EXPECT_DOUBLE_EQ(gexp::phi_loss(Index(vec({0.3, -0.6})), vec({0, 0})), 0.0);
}

TEST(PhiLoss, DimensionMismatchAndNonFinite) {
  EXPECT_THROW(gexp::phi_loss(Index::zero(2), vec({1, 2, 3})), std::invalid_argument);
  EXPECT_THROW(gexp::lambda_loss(Index::zero(2), vec({1, INFINITY})), std::invalid_argument);
  EXPECT_THROW(gexp::lambda_grad(Index::zero(3), vec({1, 2})), std::invalid_argument);
}

TEST(PhiSubgrad, Examples) {
  const Vector g1 = gexp::phi_subgrad(Index(vec({0.5, 0})), vec({0, 2}));
  EXPECT_DOUBLE_EQ(g1[0], 0.25);
  EXPECT_DOUBLE_EQ(g1[1], 0.5);
  const Vector g2 = gexp::phi_subgrad(Index::zero(2), vec({3, 4}));
  EXPECT_NEAR(g2[0], 0.3, 1e-15);
  EXPECT_NEAR(g2[1], 0.4, 1e-15);
  const Vector g3 = gexp::phi_subgrad(Index(vec({0.5, 0})), vec({0, 0}));
  EXPECT_DOUBLE_EQ(g3[0], 0.25);
  EXPECT_DOUBLE_EQ(g3[1], 0.0);
}

TEST(LambdaLoss, Examples) {
  EXPECT_DOUBLE_EQ(gexp::lambda_loss(Index::zero(2), vec({1, 1})), 1.0);
  EXPECT_DOUBLE_EQ(gexp::lambda_loss(Index(vec({0.9, 0.1})), vec({0, 0})), 0.0);
  // d = 1 reduces to the univariate expectile loss at level (1 + u) / 2.
  EXPECT_NEAR(gexp::lambda_loss(Index::scalar(0.8), vec({-2})), 0.4, 1e-15);
  EXPECT_NEAR(gexp::lambda_loss(Index::scalar(0.8), vec({-2})), gexp::expectile_loss_1d(0.9, -2.0), 1e-15);
}

TEST(LambdaGrad, Examples) {
  const Vector t = vec({0.3, -1.2, 2.0});
  EXPECT_TRUE(gexp::lambda_grad(Index::zero(3), t).isApprox(t));
  const Vector g = gexp::lambda_grad(Index::zero(3), Vector::Zero(3));
  EXPECT_EQ(g, Vector::Zero(3));

  // Expected value frozen from the finite-difference oracle below.
  const Index u(vec({0.5, 0}));
  const Vector at = vec({1, 0});
  const Vector fd = oracle::fd_gradient([&](const Vector& x) { return gexp::lambda_loss(u, x); }, at);
  EXPECT_NEAR(fd[0], 1.5, 1e-8);
  EXPECT_NEAR(fd[1], 0.0, 1e-8);
  const Vector analytic = gexp::lambda_grad(u, at);
  EXPECT_NEAR(analytic[0], 1.5, 1e-15);
  EXPECT_NEAR(analytic[1], 0.0, 1e-15);
}

TEST(LambdaGrad, MatchesFiniteDifferencesAtRandomPoints) {
  std::mt19937_64 gen(17);
  for (int i = 0; i < 1000; ++i) {
    const int d = 1 + static_cast<int>(gen() % 5);
    const Index u(oracle::random_in_ball(d, 0.999, gen));
    Vector t = oracle::random_normal(d, 2.0, gen);
    if (t.norm() < 1e-3) continue;
    const Vector fd = oracle::fd_gradient([&](const Vector& x) { return gexp::lambda_loss(u, x); }, t);
    const Vector g = gexp::lambda_grad(u, t);
    EXPECT_LE((g - fd).norm(), 1e-6 * std::max(1.0, g.norm()));
    EXPECT_LE(g.norm(), 2.0 * t.norm() * (1.0 + u.norm()));
  }
}

TEST(Score, ExamplesAndHomogeneity) {
  const Index u(vec({0.5, 0}));
  EXPECT_DOUBLE_EQ(gexp::score(u, vec({2, 3}), vec({2, 3})), 0.0);
  EXPECT_DOUBLE_EQ(gexp::score(u, vec({2, 0}), vec({1, 0})), 0.75);

  std::mt19937_64 gen(5);
  for (int i = 0; i < 200; ++i) {
    const Index a(oracle::random_in_ball(3, 0.99, gen));
    const Vector x = oracle::random_normal(3, 1.0, gen);
    const Vector y = oracle::random_normal(3, 1.0, gen);
    EXPECT_NEAR(gexp::score(a, 2.0 * x, 2.0 * y), 4.0 * gexp::score(a, x, y), 1e-12 * (1 + gexp::score(a, x, y)));
  }
}

TEST(IndexFromLevel, Examples) {
  EXPECT_NEAR(gexp::index_from_level(0.99), 0.98, 1e-15);
  EXPECT_DOUBLE_EQ(gexp::index_from_level(0.5), 0.0);
  EXPECT_NEAR(gexp::index_from_level(0.95), 0.90, 1e-15);
  EXPECT_THROW(gexp::index_from_level(1.0), std::domain_error);
}

TEST(IndexType, StrictUnitBall) {
  EXPECT_THROW(Index(vec({1.0, 0.0})), std::domain_error);
  EXPECT_THROW(Index(vec({0.8, 0.6})), std::domain_error);
  EXPECT_NO_THROW(Index(vec({0.99999, 0.0})));
  EXPECT_THROW(Index(Vector(0)), std::invalid_argument);
}

TEST(LossProperties, NonnegativityCoercivityConvexity) {
  std::mt19937_64 gen(99);
  for (int i = 0; i < 20000; ++i) {
    const int d = 1 + static_cast<int>(gen() % 4);
    const Index u(oracle::random_in_ball(d, 0.9999, gen));
    const Vector x = oracle::random_normal(d, 3.0, gen);
    const Vector y = oracle::random_normal(d, 3.0, gen);
    EXPECT_GE(gexp::phi_loss(u, x), 0.0);
    EXPECT_GE(gexp::lambda_loss(u, x), 0.0);
    EXPECT_GE(gexp::lambda_loss(u, x), 0.5 * (1.0 - u.norm()) * x.squaredNorm() - 1e-12);
    const double h = 2 * gexp::lambda_loss(u, x) + 2 * gexp::lambda_loss(u, y) - gexp::lambda_loss(u, x + y);
    EXPECT_GT(h, 0.0);
  }
}

TEST(LossProperties, ParallelogramInequality) {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 20000; ++i) {
    const int d = 1 + static_cast<int>(gen() % 4);
    const Vector u = oracle::random_in_ball(d, 1.0, gen);
    const Vector x = oracle::random_normal(d, 2.0, gen);
    const Vector y = oracle::random_normal(d, 2.0, gen);
    const double mid = 2 * x.norm() * u.dot(x) + 2 * y.norm() * u.dot(y) - (x + y).norm() * u.dot(x + y);
    const double bound = (x - y).squaredNorm();
    EXPECT_LE(std::abs(mid), bound + 1e-10);
  }
}

TEST(LossProperties, OneDimensionalReduction) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> ud(-0.999, 0.999);
  std::normal_distribution<double> nd(0.0, 4.0);
  for (int i = 0; i < 5000; ++i) {
    const double u = ud(gen);
    const double t = nd(gen);
    const Index idx = Index::scalar(u);
    const Vector tv = Vector::Constant(1, t);
    EXPECT_NEAR(gexp::lambda_loss(idx, tv), gexp::expectile_loss_1d(0.5 * (1 + u), t), 1e-12 * (1 + t * t));
    EXPECT_NEAR(gexp::phi_loss(idx, tv), gexp::check_loss(0.5 * (1 + u), t), 1e-13 * (1 + std::abs(t)));
  }
}

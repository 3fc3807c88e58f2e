#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gpett/gp_model.hpp"
#include "support.hpp"

using namespace gpett;

namespace {

GpHyperParams params(double sf, double l, double sr = 0.5, double mu = 0.0) { return {sf, l, sr, 0.0, mu}; }

}  // namespace

TEST(Kernel, DiagonalIsSignalVariance) {
  EXPECT_DOUBLE_EQ(kernel_eval(0.7, 0.7, params(2, 1), InputKind::ScalarLine), 4.0);
  EXPECT_DOUBLE_EQ(kernel_eval(1.3, 1.3, params(2, 0.3), InputKind::AngleCircle), 4.0);
}

TEST(Kernel, CircleIsPeriodic) {
  EXPECT_NEAR(kernel_eval(0.0, 2 * std::numbers::pi, params(2, 0.3), InputKind::AngleCircle), 4.0, 1e-12);
  EXPECT_NEAR(kernel_eval(0.1, 6.2, params(1, 0.5), InputKind::AngleCircle),
              kernel_eval(0.1 + 2 * std::numbers::pi, 6.2, params(1, 0.5), InputKind::AngleCircle), 1e-12);
}

TEST(Kernel, LineAtOneLengthScale) {
  EXPECT_NEAR(kernel_eval(0.0, 0.8, params(1, 0.8), InputKind::ScalarLine), 0.6065306597126334, 1e-12);
}

TEST(Kernel, SymmetricOnRandomDraws) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), b = u(rng);
    for (auto kind : {InputKind::ScalarLine, InputKind::AngleCircle})
      EXPECT_EQ(kernel_eval(a, b, params(1.5, 0.7), kind), kernel_eval(b, a, params(1.5, 0.7), kind));
  }
}

TEST(Kernel, DerivativeMatchesFiniteDifference) {
  const auto hp = params(2, std::numbers::pi / 10);
  for (double a : {0.1, 1.0, 3.0, 6.0})
    for (double b : {0.0, 0.5, 3.1}) {
      const double h = 1e-6;
      const double fd = (kernel_eval(a + h, b, hp, InputKind::AngleCircle) -
                         kernel_eval(a - h, b, hp, InputKind::AngleCircle)) / (2 * h);
      EXPECT_NEAR(kernel_derivative(a, b, hp, InputKind::AngleCircle), fd, 1e-6);
    }
}

TEST(Kernel, RejectsNonFiniteInput) {
  EXPECT_THROW(kernel_eval(NAN, 0.0, params(1, 1), InputKind::ScalarLine), InvalidArgument);
}

TEST(KernelMatrix, SinglePoint) {
  const std::vector<double> a{0.0};
  const Eigen::MatrixXd k = kernel_matrix(a, a, params(2, 1), InputKind::ScalarLine);
  ASSERT_EQ(k.rows(), 1);
  EXPECT_DOUBLE_EQ(k(0, 0), 4.0);
}

TEST(KernelMatrix, TwoPointsOneLengthScaleApart) {
  const std::vector<double> a{0.0, 1.5};
  const Eigen::MatrixXd k = kernel_matrix(a, a, params(2, 1.5), InputKind::ScalarLine);
  EXPECT_NEAR(k(0, 1), 4.0 * 0.6065306597126334, 1e-12);
  EXPECT_EQ(k(0, 1), k(1, 0));
}

TEST(KernelMatrix, SymmetricPsdWithSignalDiagonal) {
  const auto grid = InputGrid::uniform_angles(24);
  const Eigen::MatrixXd k = kernel_matrix(grid.points(), grid.points(), params(2, 0.3), InputKind::AngleCircle);
  EXPECT_EQ((k - k.transpose()).cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < k.rows(); ++i) EXPECT_DOUBLE_EQ(k(i, i), 4.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-10);
}

TEST(KernelMatrix, EmptyInputThrows) {
  const std::vector<double> none;
  const std::vector<double> one{1.0};
  EXPECT_THROW(kernel_matrix(none, one, params(1, 1), InputKind::ScalarLine), InvalidArgument);
}

TEST(Regress, NoDataGivesPrior) {
  const std::vector<double> none, q{0.0, 1.0};
  const auto b = gp_regress(none, none, q, params(2, 1, 0.5, 1.0), InputKind::ScalarLine);
  EXPECT_DOUBLE_EQ(b.mean(0), 1.0);
  EXPECT_DOUBLE_EQ(b.cov(0, 0), 4.0);
  EXPECT_NEAR(b.cov(0, 1), 4.0 * std::exp(-0.5), 1e-12);
}

TEST(Regress, SinglePairScalarConditioning) {
  const std::vector<double> x{0.3}, y{2.0}, q{0.3};
  const double sf = 2.0, sr = 0.5, mu = 1.0;
  const auto b = gp_regress(x, y, q, params(sf, 1, sr, mu), InputKind::ScalarLine);
  EXPECT_NEAR(b.mean(0), mu + sf * sf * (y[0] - mu) / (sf * sf + sr * sr), 1e-12);
  EXPECT_NEAR(b.cov(0, 0), sf * sf - sf * sf * sf * sf / (sf * sf + sr * sr), 1e-12);
}

TEST(Regress, SmallNoiseInterpolates) {
  const std::vector<double> x{0.0, 1.0, 2.5}, y{0.2, -0.4, 1.1};
  const auto b = gp_regress(x, y, x, params(1, 1, 1e-6), InputKind::ScalarLine);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(b.mean(i), y[i], 1e-6);
}

TEST(Regress, MatchesIndependentBatchOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 10);
  std::vector<double> x, y, q;
  for (int i = 0; i < 25; ++i) {
    x.push_back(u(rng));
    y.push_back(std::sin(x.back()));
  }
  for (int i = 0; i < 30; ++i) q.push_back(u(rng));
  const auto b = gp_regress(x, y, q, params(1.2, 0.9, 0.3, 0.5), InputKind::ScalarLine);
  const auto o = oracle::batch_gp(x, y, q, 1.2, 0.9, 0.3, 0.5);
  EXPECT_LT((b.mean - o.mean).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((b.cov - o.cov).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Regress, MismatchedLengthsThrow) {
  const std::vector<double> x{0.0, 1.0}, y{1.0}, q{0.0};
  EXPECT_THROW(gp_regress(x, y, q, params(1, 1), InputKind::ScalarLine), InvalidArgument);
}

TEST(Projection, QueryOnBasisIsOneHot) {
  const auto basis = InputGrid::uniform_angles(8);
  const std::vector<double> q{basis.points()[3]};
  const auto p = conditional_projection(q, basis, params(2, 0.4));
  for (Eigen::Index j = 0; j < 8; ++j) EXPECT_EQ(p.H(0, j), j == 3 ? 1.0 : 0.0);
  EXPECT_EQ(p.residual(0, 0), 0.0);
}

TEST(Projection, SingleBasisPoint) {
  const InputGrid basis(InputKind::ScalarLine, {0.0});
  const std::vector<double> q{0.7};
  const auto hp = params(1.5, 1.0);
  const auto p = conditional_projection(q, basis, hp);
  EXPECT_NEAR(p.H(0, 0), std::exp(-0.5 * 0.49), 1e-9);
  EXPECT_NEAR(p.residual(0, 0), 2.25 * (1 - std::exp(-0.49)), 1e-8);
}

TEST(Projection, FarQueryDecorrelates) {
  const InputGrid basis(InputKind::ScalarLine, {0.0, 1.0, 2.0});
  const std::vector<double> q{100.0};
  const auto p = conditional_projection(q, basis, params(2, 0.5));
  EXPECT_LT(p.H.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(p.residual(0, 0), 4.0, 1e-12);
}

TEST(Projection, ResidualNonNegative) {
  const auto basis = InputGrid::uniform_angles(20);
  std::vector<double> q;
  for (int i = 0; i < 100; ++i) q.push_back(0.0628 * i);
  const auto p = conditional_projection(q, basis, params(2, std::numbers::pi / 10));
  EXPECT_GE(p.residual.diagonal().minCoeff(), 0.0);
}

TEST(InputGridTest, RejectsDuplicates) {
  EXPECT_THROW(InputGrid(InputKind::ScalarLine, {0.0, 1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(InputGrid(InputKind::ScalarLine, {}), InvalidArgument);
}

TEST(HyperParams, Validation) {
  EXPECT_THROW(params(0, 1).validate(), InvalidArgument);
  EXPECT_THROW(params(1, -1).validate(), InvalidArgument);
  GpHyperParams hp;
  hp.alpha = -1;
  EXPECT_THROW(hp.validate(), InvalidArgument);
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ntot/linalg.hpp"
#include "ntot/thresholding.hpp"
#include "test_support.hpp"

namespace ntot {
namespace {

using testing::dense;
using testing::vec;

TEST(DenseMatrix, RejectsNonFiniteEntries) {
  RowMajorMatrix m = RowMajorMatrix::Ones(2, 2);
  m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(DenseMatrix{m}, std::invalid_argument);
  m(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(DenseMatrix{m}, std::invalid_argument);
}

TEST(DenseMatrix, RejectsEmptyShapesAndShortData) {
  const double data[] = {1.0, 2.0, 3.0};
  EXPECT_THROW(DenseMatrix(2, 2, data), DimensionMismatch);
  EXPECT_THROW(DenseMatrix(0, 3, std::span<const double>{}), std::invalid_argument);
}

TEST(DenseMatrix, AnyShapeIsAllowed) {
  EXPECT_NO_THROW(DenseMatrix::zeros(5, 2));
  EXPECT_NO_THROW(DenseMatrix::identity(1));
}

TEST(Matvec, Identity) {
  EXPECT_EQ(matvec(DenseMatrix::identity(2), vec({3, -1})), vec({3, -1}));
}

TEST(Matvec, ZeroMatrix) {
  EXPECT_EQ(matvec(DenseMatrix::zeros(2, 3), vec({1, 1, 1})), vec({0, 0}));
}

TEST(Matvec, HandArithmetic) {
  const double data[] = {1, 2, 3, 4};
  EXPECT_EQ(matvec(DenseMatrix(2, 2, data), vec({1, 1})), vec({3, 7}));
  EXPECT_EQ(matvec_transpose(DenseMatrix(2, 2, data), vec({1, 1})), vec({4, 6}));
}

TEST(Matvec, DimensionMismatch) {
  EXPECT_THROW(matvec(DenseMatrix::identity(2), vec({1, 2, 3})), DimensionMismatch);
  EXPECT_THROW(matvec_transpose(DenseMatrix::identity(2), vec({1})), DimensionMismatch);
}

TEST(SpectralExtremes, Identity) {
  const SpectralBounds s = spectral_extremes(DenseMatrix::identity(3));
  EXPECT_NEAR(s.sigma_max, 1.0, 1e-12);
  EXPECT_NEAR(s.sigma_min, 1.0, 1e-12);
}

TEST(SpectralExtremes, PaddedDiagonal) {
  const double data[] = {3, 0, 0, 0, 0, 2, 0, 0};
  const SpectralBounds s = spectral_extremes(DenseMatrix(2, 4, data));
  EXPECT_NEAR(s.sigma_max, 3.0, 1e-12);
  EXPECT_NEAR(s.sigma_min, 2.0, 1e-12);
}

TEST(SpectralExtremes, ZeroMatrix) {
  const SpectralBounds s = spectral_extremes(DenseMatrix::zeros(2, 3));
  EXPECT_EQ(s.sigma_max, 0.0);
  EXPECT_EQ(s.sigma_min, 0.0);
}

TEST(SpectralExtremes, MatchesJacobiOracle) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = testing::gaussian(gen, 2, 3);
    const SpectralBounds s = spectral_extremes(dense(a));
    const auto small = testing::jacobi_eigenvalues(a * a.transpose());
    const auto big = testing::jacobi_eigenvalues(a.transpose() * a);
    EXPECT_NEAR(s.sigma_max, std::sqrt(small.back()), 1e-8);
    EXPECT_NEAR(s.sigma_min, std::sqrt(small.front()), 1e-8);
    // The nonzero spectrum of AᵀA agrees with that of AAᵀ.
    EXPECT_NEAR(s.sigma_max, std::sqrt(big.back()), 1e-8);
    EXPECT_NEAR(s.sigma_min, std::sqrt(big[1]), 1e-8);
    EXPECT_GE(s.sigma_max, s.sigma_min);
  }
}

TEST(SpectralExtremes, RankDeficientAndTallMatrices) {
  std::mt19937_64 gen(12);
  const Eigen::MatrixXd u = testing::gaussian(gen, 4, 1);
  const Eigen::MatrixXd rank_one = u * testing::gaussian(gen, 1, 6);
  const SpectralBounds s = spectral_extremes(dense(rank_one));
  EXPECT_NEAR(s.sigma_min, 0.0, 1e-6);
  EXPECT_NEAR(s.sigma_max, std::sqrt(testing::jacobi_eigenvalues(rank_one * rank_one.transpose()).back()),
              1e-8);

  const Eigen::MatrixXd tall = testing::gaussian(gen, 7, 3);
  const auto eig = testing::jacobi_eigenvalues(tall.transpose() * tall);
  const SpectralBounds t = spectral_extremes(dense(tall));
  EXPECT_NEAR(t.sigma_max, std::sqrt(eig.back()), 1e-8);
  EXPECT_NEAR(t.sigma_min, std::sqrt(eig.front()), 1e-8);
}

TEST(SpectralExtremes, ClusteredSpectrum) {
  std::mt19937_64 gen(13);
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(testing::gaussian(gen, 30, 30)).householderQ();
  Eigen::VectorXd sigma = Eigen::VectorXd::LinSpaced(20, 1.0, 1.0 + 1e-4);
  const Eigen::MatrixXd a = sigma.asDiagonal() * q.topRows(20);
  const SpectralBounds s = spectral_extremes(dense(a));
  EXPECT_NEAR(s.sigma_max, 1.0 + 1e-4, 1e-9);
  EXPECT_NEAR(s.sigma_min, 1.0, 1e-9);
}

TEST(NewtonDirection, IdentityScalarFormula) {
  const Vector d = newton_direction(DenseMatrix::identity(2), 2.0, vec({1, 0}));
  EXPECT_NEAR(d(0), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(d(1), 0.0);
}

TEST(NewtonDirection, ZeroResidual) {
  std::mt19937_64 gen(14);
  const DenseMatrix a = dense(testing::gaussian(gen, 3, 5));
  EXPECT_EQ(newton_direction(a, 1.0, Vector::Zero(3)), Vector::Zero(5));
}

TEST(NewtonDirection, AgreesWithDirectNSideSolve) {
  std::mt19937_64 gen(15);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = testing::gaussian(gen, 6, 12);
    const double eps = std::pow(spectral_extremes(dense(a)).sigma_max, 2) + 1.0;
    const Vector r = testing::gaussian_vector(gen, 6);
    Eigen::MatrixXd system = a.transpose() * a;
    system.diagonal().array() += eps;
    const Vector expected = system.fullPivLu().solve(a.transpose() * r);
    EXPECT_LE((newton_direction(dense(a), eps, r) - expected).norm(), 1e-10 * expected.norm());
  }
}

TEST(NewtonDirection, RejectsBadInput) {
  EXPECT_THROW(NewtonDirection(DenseMatrix::identity(2), 0.0), std::invalid_argument);
  EXPECT_THROW(NewtonDirection(DenseMatrix::identity(2), -1.0), std::invalid_argument);
  EXPECT_THROW(newton_direction(DenseMatrix::identity(2), 1.0, vec({1})), DimensionMismatch);
}

TEST(LeastSquaresOnSupport, OrthonormalColumns) {
  const Vector z =
      least_squares_on_support(DenseMatrix::identity(3), vec({5, -2, 7}), SupportSet({0, 2}, 3));
  EXPECT_EQ(z, vec({5, 0, 7}));
}

TEST(LeastSquaresOnSupport, EmptySupport) {
  EXPECT_EQ(least_squares_on_support(DenseMatrix::identity(3), vec({5, -2, 7}), SupportSet({}, 3)),
            Vector::Zero(3));
}

TEST(LeastSquaresOnSupport, NormalEquationsHold) {
  std::mt19937_64 gen(16);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = testing::gaussian(gen, 8, 16);
    const Vector y = testing::gaussian_vector(gen, 8);
    const SupportSet s({1, 4, 9, 15}, 16);
    const Vector z = least_squares_on_support(dense(a), y, s);
    for (Index j = 0; j < 16; ++j)
      if (!s.contains(j)) {
        EXPECT_EQ(z(j), 0.0);
      }
    const Vector r = y - a * z;
    for (Index j : s.indices()) EXPECT_LE(std::abs(a.col(j).dot(r)), 1e-9 * y.norm());
  }
}

TEST(LeastSquaresOnSupport, RankDeficientGivesMinimumNorm) {
  // Two identical columns: the minimum-norm solution splits the weight.
  const double data[] = {1, 1, 0, 2, 2, 0};
  const Vector z = least_squares_on_support(DenseMatrix(2, 3, data), vec({1, 2}), SupportSet({0, 1}, 3));
  EXPECT_NEAR(z(0), 0.5, 1e-12);
  EXPECT_NEAR(z(1), 0.5, 1e-12);
}

TEST(Helpers, CountNonzerosAndBinomial) {
  EXPECT_EQ(count_nonzeros(vec({0, 1, 0, -2})), 2);
  EXPECT_EQ(binomial_capped(10, 2, 1000), 45u);
  EXPECT_EQ(binomial_capped(12, 0, 1000), 1u);
  EXPECT_EQ(binomial_capped(5, 7, 1000), 0u);
  EXPECT_EQ(binomial_capped(512, 70, 2'000'000), 2'000'001u);
}

}  // namespace
}  // namespace ntot

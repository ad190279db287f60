#include <gtest/gtest.h>

#include "ntot/capped_simplex_qp.hpp"
#include "ntot/thresholding.hpp"
#include "test_support.hpp"

namespace ntot {
namespace {

using testing::vec;

void expect_feasible(const Vector& w, Index k) {
  EXPECT_GE(w.minCoeff(), -1e-9);
  EXPECT_LE(w.maxCoeff(), 1.0 + 1e-9);
  EXPECT_LE(std::abs(w.sum() - static_cast<double>(k)), 1e-8 * static_cast<double>(k));
}

TEST(Projection, AlreadyFeasible) {
  EXPECT_EQ(project_capped_simplex(vec({0.5, 0.5}), 1), vec({0.5, 0.5}));
}

TEST(Projection, FullCapacityForcesOnes) {
  EXPECT_EQ(project_capped_simplex(vec({0.3, 0.3, 0.3}), 3), vec({1, 1, 1}));
}

TEST(Projection, ClampsToVertex) {
  const Vector w = project_capped_simplex(vec({2, 0}), 1);
  EXPECT_NEAR(w(0), 1.0, 1e-15);
  EXPECT_NEAR(w(1), 0.0, 1e-15);
}

TEST(Projection, MatchesDenseGridOnSegment) {
  // Feasible set for n = 2, k = 1 is the segment w = (t, 1 − t).
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector v = testing::gaussian_vector(gen, 2, 1.5);
    double best_t = 0.0, best = 1e300;
    for (int i = 0; i <= 1000; ++i) {
      const double t = i * 1e-3;
      const double d = std::pow(v(0) - t, 2) + std::pow(v(1) - 1 + t, 2);
      if (d < best) best = d, best_t = t;
    }
    const Vector w = project_capped_simplex(v, 1);
    EXPECT_NEAR(w(0), best_t, 2e-3);
    EXPECT_NEAR(w(1), 1 - best_t, 2e-3);
  }
}

TEST(Projection, MatchesDenseGridInThreeDimensions) {
  std::mt19937_64 gen(32);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector v = testing::gaussian_vector(gen, 3, 1.0);
    for (Index k = 1; k <= 2; ++k) {
      Vector best_w(3);
      double best = 1e300;
      for (int i = 0; i <= 1000; ++i) {
        for (int j = 0; j <= 1000; ++j) {
          const Vector w = vec({i * 1e-3, j * 1e-3, static_cast<double>(k) - (i + j) * 1e-3});
          if (w(2) < 0 || w(2) > 1) continue;
          const double d = (v - w).squaredNorm();
          if (d < best) best = d, best_w = w;
        }
      }
      EXPECT_LE((project_capped_simplex(v, k) - best_w).lpNorm<Eigen::Infinity>(), 2e-3);
    }
  }
}

TEST(Projection, FeasibleIdempotentNonexpansive) {
  std::mt19937_64 gen(33);
  std::uniform_int_distribution<int> size(1, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = size(gen);
    const Index k = 1 + static_cast<Index>(gen() % static_cast<std::uint64_t>(n));
    const Vector a = testing::gaussian_vector(gen, n, 3.0);
    const Vector b = testing::gaussian_vector(gen, n, 3.0);
    const Vector pa = project_capped_simplex(a, k), pb = project_capped_simplex(b, k);
    expect_feasible(pa, k);
    EXPECT_LE((project_capped_simplex(pa, k) - pa).norm(), 1e-12);
    EXPECT_LE((pa - pb).norm(), (a - b).norm() + 1e-12);
  }
}

TEST(Projection, ThresholdCharacterization) {
  // w_i = clamp(v_i − τ, 0, 1) for a single τ.
  std::mt19937_64 gen(34);
  const Vector v = testing::gaussian_vector(gen, 25, 2.0);
  const Vector w = project_capped_simplex(v, 7);
  std::optional<double> tau;
  for (Index i = 0; i < v.size(); ++i) {
    if (w(i) > 1e-12 && w(i) < 1 - 1e-12) {
      if (!tau) tau = v(i) - w(i);
      EXPECT_NEAR(v(i) - w(i), *tau, 1e-12);
    }
  }
  ASSERT_TRUE(tau.has_value());
  for (Index i = 0; i < v.size(); ++i)
    EXPECT_NEAR(w(i), std::clamp(v(i) - *tau, 0.0, 1.0), 1e-12);
}

TEST(Projection, RejectsInfeasibleCapacity) {
  EXPECT_THROW(project_capped_simplex(vec({1, 2}), 3), std::invalid_argument);
  EXPECT_THROW(project_capped_simplex(vec({1, 2}), 0), std::invalid_argument);
}

TEST(RelaxedQP, ExactFitIsFound) {
  const DenseMatrix a = DenseMatrix::identity(3);
  const Vector u = vec({4, 0, 0}), y = vec({4, 0, 0});
  const QPSolution s = solve_relaxed_ot({a, u, y, 1});
  EXPECT_TRUE(s.converged);
  EXPECT_NEAR(s.w(0), 1.0, 1e-6);
  EXPECT_NEAR(s.objective, 0.0, 1e-10);
}

TEST(RelaxedQP, ZeroIterateLeavesObjectiveAtMeasurementNorm) {
  std::mt19937_64 gen(35);
  const DenseMatrix a = testing::dense(testing::gaussian(gen, 4, 6));
  const Vector y = testing::gaussian_vector(gen, 4);
  const QPSolution s = solve_relaxed_ot({a, Vector::Zero(6), y, 2});
  expect_feasible(s.w, 2);
  EXPECT_NEAR(s.objective, y.squaredNorm(), 1e-12);
}

TEST(RelaxedQP, BoundedByBinaryOptimum) {
  std::mt19937_64 gen(36);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix a = testing::dense(testing::gaussian(gen, 6, 10));
    const Vector u = testing::gaussian_vector(gen, 10);
    const Vector y = testing::gaussian_vector(gen, 6);
    // Independent enumeration of all binary masks with two ones.
    double binary = 1e300;
    for (Index i = 0; i < 10; ++i)
      for (Index j = i + 1; j < 10; ++j)
        binary = std::min(binary, (y - a.values().col(i) * u(i) - a.values().col(j) * u(j)).squaredNorm());
    const QPSolution s = solve_relaxed_ot({a, u, y, 2});
    EXPECT_LE(s.objective, binary + 1e-8);
    expect_feasible(s.w, 2);
  }
}

TEST(RelaxedQP, ObjectiveHistoryIsMonotone) {
  std::mt19937_64 gen(37);
  QPOptions options;
  options.record_history = true;
  for (int trial = 0; trial < 10; ++trial) {
    const DenseMatrix a = testing::dense(testing::gaussian(gen, 20, 40));
    const Vector u = testing::gaussian_vector(gen, 40);
    const Vector y = testing::gaussian_vector(gen, 20);
    const QPSolution s = solve_relaxed_ot({a, u, y, 5}, options);
    ASSERT_FALSE(s.objective_history.empty());
    for (std::size_t i = 1; i < s.objective_history.size(); ++i)
      EXPECT_LE(s.objective_history[i], s.objective_history[i - 1] * (1 + 1e-12) + 1e-15);
    EXPECT_TRUE(s.converged);
    EXPECT_LE(s.kkt_residual, options.tol);
  }
}

TEST(RelaxedQP, FullCapacityForcesAllOnes) {
  std::mt19937_64 gen(38);
  const DenseMatrix a = testing::dense(testing::gaussian(gen, 3, 4));
  const QPSolution s = solve_relaxed_ot({a, testing::gaussian_vector(gen, 4), testing::gaussian_vector(gen, 3), 4});
  EXPECT_LE((s.w - Vector::Ones(4)).norm(), 1e-12);
}

TEST(RelaxedQP, WarmStartReachesSameObjective) {
  std::mt19937_64 gen(39);
  const DenseMatrix a = testing::dense(testing::gaussian(gen, 15, 30));
  const Vector u = testing::gaussian_vector(gen, 30), y = testing::gaussian_vector(gen, 15);
  const QPSolution cold = solve_relaxed_ot({a, u, y, 4});
  const QPSolution warm = solve_relaxed_ot({a, u, y, 4}, {}, cold.w);
  EXPECT_NEAR(warm.objective, cold.objective, 1e-8 * (1 + cold.objective));
  EXPECT_LE(warm.iterations, cold.iterations);
}

TEST(RelaxedQP, DimensionChecks) {
  const DenseMatrix a = DenseMatrix::identity(3);
  const Vector u = vec({1, 2}), y = vec({1, 2, 3});
  EXPECT_THROW(solve_relaxed_ot({a, u, y, 1}), DimensionMismatch);
}

}  // namespace
}  // namespace ntot

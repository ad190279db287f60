#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "ntot/errors.hpp"

namespace ntot {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class SupportSet;

/// Real dense m x n matrix, row-major, all entries finite.
///
/// Any shape with m, n >= 1 is admitted; the recovery paths additionally
/// expect m < n but do not rely on it.
class DenseMatrix {
 public:
  explicit DenseMatrix(RowMajorMatrix values);
  DenseMatrix(Index rows, Index cols, std::span<const double> row_major);

  static DenseMatrix identity(Index n);
  static DenseMatrix zeros(Index rows, Index cols);

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  double operator()(Index i, Index j) const { return values_(i, j); }
  const RowMajorMatrix& values() const { return values_; }

  /// Column submatrix A_S, columns in the order of `columns`.
  Eigen::MatrixXd columns(std::span<const Index> columns) const;

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.values_ == b.values_;
  }

 private:
  RowMajorMatrix values_;
};

/// Throws std::invalid_argument if any entry is NaN or infinite.
void require_finite(const Vector& v, const char* what);

Vector matvec(const DenseMatrix& a, const Vector& x);
/// Aᵀ x.
Vector matvec_transpose(const DenseMatrix& a, const Vector& x);

/// Largest and smallest singular value of A. `sigma_min` is the smallest of
/// the min(m, n) singular values, so it is 0 for rank-deficient A.
struct SpectralBounds {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  /// Relative Rayleigh-quotient residual reached by the slower of the two
  /// eigen-iterations.
  double tol = 0.0;
};

struct SpectralOptions {
  int max_iterations = 10000;
  double tolerance = 1e-12;
};

/// Power iteration for σ₁² and inverse iteration for σ_min² on the smaller
/// Gram matrix (AAᵀ when m <= n). If either iteration misses `tolerance`
/// within `max_iterations`, the extremes come from a full symmetric
/// eigendecomposition instead. Throws NumericalFailure on non-finite input.
SpectralBounds spectral_extremes(const DenseMatrix& a,
                                 const SpectralOptions& options = {});

/// Applies d = (AᵀA + εI)⁻¹ Aᵀ r through the equivalent m x m form
/// Aᵀ (AAᵀ + εI)⁻¹ r. The factorization of AAᵀ + εI is computed once and
/// reused for every `apply`.
class NewtonDirection {
 public:
  NewtonDirection(const DenseMatrix& a, double eps);

  Vector apply(const Vector& r) const;
  double eps() const { return eps_; }

 private:
  DenseMatrix a_;
  double eps_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

/// One-shot convenience wrapper over NewtonDirection.
Vector newton_direction(const DenseMatrix& a, double eps, const Vector& r);

/// argmin ‖y − Az‖₂ over z supported on `support`. Uses a complete
/// orthogonal factorization of A_S; rank-deficient A_S yields the
/// minimum-norm solution (pivots <= 1e-12 * max pivot count as zero).
Vector least_squares_on_support(const DenseMatrix& a, const Vector& y,
                                const SupportSet& support);

/// Number of nonzero entries.
Index count_nonzeros(const Vector& x);

/// C(n, k) saturated at `cap` + 1 so guard checks never overflow.
std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap);

}  // namespace ntot

#include "ntot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>

#include "ntot/thresholding.hpp"

namespace ntot {

namespace {

bool all_finite(const auto& m) { return m.allFinite(); }

// Deterministic start block for the subspace iterations: hashed entries in
// [-1, 1) so no column is structurally orthogonal to an eigenvector.
Eigen::MatrixXd start_block(Index rows, Index cols) {
  Eigen::MatrixXd block(rows, cols);
  std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      state += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = state;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      z ^= z >> 31;
      block(i, j) = static_cast<double>(z >> 11) * 0x1.0p-52 - 1.0;
    }
  }
  return block;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& w) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(w);
  return qr.householderQ() * Eigen::MatrixXd::Identity(w.rows(), w.cols());
}

struct ExtremePair {
  double eigenvalue = 0.0;
  double residual = 0.0;
  bool converged = false;
};

// Block subspace iteration with Rayleigh-Ritz on a symmetric PSD matrix.
// With `largest` the block is multiplied by `gram`; otherwise by its inverse
// (through `inverse`), which drives the block towards the smallest
// eigenvalues. Convergence is judged on the Ritz pair's residual in `gram`,
// relative to `scale`, or to the Ritz value itself when `scale` is 0.
template <class Apply>
ExtremePair subspace_iteration(const Eigen::MatrixXd& gram, Apply apply,
                               bool largest, double scale,
                               const SpectralOptions& options) {
  const Index p = gram.rows();
  const Index b = std::min<Index>(p, 16);
  Eigen::MatrixXd v = orthonormalize(start_block(p, b));
  ExtremePair out;
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::MatrixXd gv = gram * v;
    Eigen::MatrixXd h = v.transpose() * gv;
    h = 0.5 * (h + h.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(h);
    const Index pick = largest ? b - 1 : 0;
    Eigen::VectorXd x = v * ritz.eigenvectors().col(pick);
    x.normalize();
    Eigen::VectorXd gx = gram * x;
    const double theta = x.dot(gx);
    out.eigenvalue = theta;
    const double denom = scale > 0.0 ? scale : std::abs(theta);
    out.residual = denom > 0.0 ? (gx - theta * x).norm() / denom : 0.0;
    if (out.residual <= options.tolerance) {
      out.converged = true;
      return out;
    }
    v = orthonormalize(apply(v));
  }
  return out;
}

}  // namespace

DenseMatrix::DenseMatrix(RowMajorMatrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1)
    throw std::invalid_argument("DenseMatrix: shape must be at least 1x1");
  if (!all_finite(values_))
    throw std::invalid_argument("DenseMatrix: entries must be finite");
}

DenseMatrix::DenseMatrix(Index rows, Index cols,
                         std::span<const double> row_major)
    : DenseMatrix([&] {
        if (rows < 1 || cols < 1 ||
            static_cast<Index>(row_major.size()) != rows * cols)
          throw DimensionMismatch("DenseMatrix: entry count does not match shape");
        RowMajorMatrix m(rows, cols);
        std::copy(row_major.begin(), row_major.end(), m.data());
        return m;
      }()) {}

DenseMatrix DenseMatrix::identity(Index n) {
  return DenseMatrix(RowMajorMatrix::Identity(n, n));
}

DenseMatrix DenseMatrix::zeros(Index rows, Index cols) {
  return DenseMatrix(RowMajorMatrix::Zero(rows, cols));
}

Eigen::MatrixXd DenseMatrix::columns(std::span<const Index> columns) const {
  Eigen::MatrixXd sub(rows(), static_cast<Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] < 0 || columns[j] >= cols())
      throw DimensionMismatch("column index out of range");
    sub.col(static_cast<Index>(j)) = values_.col(columns[j]);
  }
  return sub;
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite())
    throw std::invalid_argument(std::string(what) + ": entries must be finite");
}

Vector matvec(const DenseMatrix& a, const Vector& x) {
  if (x.size() != a.cols())
    throw DimensionMismatch("matvec: x.len != A.cols");
  return a.values() * x;
}

Vector matvec_transpose(const DenseMatrix& a, const Vector& x) {
  if (x.size() != a.rows())
    throw DimensionMismatch("matvec_transpose: x.len != A.rows");
  return a.values().transpose() * x;
}

namespace {

// Fallback for spectra the block iterations cannot separate (tight clusters
// around the extremes): a full symmetric eigendecomposition of the Gram matrix.
SpectralBounds dense_spectral_extremes(const Eigen::MatrixXd& gram) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || !eig.eigenvalues().allFinite())
    throw NumericalFailure("spectral_extremes: eigendecomposition of the Gram matrix failed");
  const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  SpectralBounds out;
  out.sigma_max = std::sqrt(top);
  out.sigma_min = std::sqrt(std::clamp(eig.eigenvalues().minCoeff(), 0.0, top));
  out.tol = std::numeric_limits<double>::epsilon();
  return out;
}

}  // namespace

SpectralBounds spectral_extremes(const DenseMatrix& a,
                                 const SpectralOptions& options) {
  const auto& v = a.values();
  const Eigen::MatrixXd gram = a.rows() <= a.cols()
                                   ? Eigen::MatrixXd(v * v.transpose())
                                   : Eigen::MatrixXd(v.transpose() * v);
  if (gram.isZero(0.0)) return {};

  auto multiply = [&](const Eigen::MatrixXd& block) -> Eigen::MatrixXd {
    return gram * block;
  };
  const ExtremePair top =
      subspace_iteration(gram, multiply, /*largest=*/true, 0.0, options);
  if (!top.converged) return dense_spectral_extremes(gram);

  const double scale = top.eigenvalue;
  // Shifted Cholesky so exactly singular Gram matrices still factor; the
  // shift only affects the convergence rate, not the Rayleigh quotient.
  const Index p = gram.rows();
  Eigen::LLT<Eigen::MatrixXd> llt;
  double shift = 0.0;
  llt.compute(gram);
  if (llt.info() != Eigen::Success) {
    shift = 1e-13 * scale;
    llt.compute(gram + shift * Eigen::MatrixXd::Identity(p, p));
    if (llt.info() != Eigen::Success) return dense_spectral_extremes(gram);
  }
  auto solve = [&](const Eigen::MatrixXd& block) -> Eigen::MatrixXd {
    return llt.solve(block);
  };
  ExtremePair bottom =
      subspace_iteration(gram, solve, /*largest=*/false, scale, options);
  if (!bottom.converged) return dense_spectral_extremes(gram);

  SpectralBounds out;
  out.sigma_max = std::sqrt(scale);
  out.sigma_min = std::sqrt(std::clamp(bottom.eigenvalue, 0.0, scale));
  out.tol = std::max(top.residual, bottom.residual);
  return out;
}

NewtonDirection::NewtonDirection(const DenseMatrix& a, double eps)
    : a_(a), eps_(eps) {
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw ConfigError("newton_direction: eps must be positive and finite");
  const auto& v = a.values();
  Eigen::MatrixXd system = v * v.transpose();
  system.diagonal().array() += eps;
  factor_.compute(system);
  if (factor_.info() != Eigen::Success)
    throw NumericalFailure("newton_direction: factorization of AAᵀ + εI failed");
}

Vector NewtonDirection::apply(const Vector& r) const {
  if (r.size() != a_.rows())
    throw DimensionMismatch("newton_direction: r.len != A.rows");
  Vector s = factor_.solve(r);
  Vector d = a_.values().transpose() * s;
  if (!d.allFinite())
    throw NumericalFailure("newton_direction: non-finite direction");
  return d;
}

Vector newton_direction(const DenseMatrix& a, double eps, const Vector& r) {
  return NewtonDirection(a, eps).apply(r);
}

Vector least_squares_on_support(const DenseMatrix& a, const Vector& y,
                                const SupportSet& support) {
  if (y.size() != a.rows())
    throw DimensionMismatch("least_squares_on_support: y.len != A.rows");
  if (support.capacity() != a.cols() && !support.empty())
    throw DimensionMismatch("least_squares_on_support: support capacity != A.cols");
  Vector z = Vector::Zero(a.cols());
  if (support.empty()) return z;
  const auto& idx = support.indices();
  Eigen::MatrixXd sub = a.columns(idx);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-12);
  cod.compute(sub);
  Eigen::VectorXd zs = cod.solve(y);
  for (std::size_t j = 0; j < idx.size(); ++j)
    z(idx[j]) = zs(static_cast<Index>(j));
  return z;
}

Index count_nonzeros(const Vector& x) {
  return static_cast<Index>((x.array() != 0.0).count());
}

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > cap) return cap + 1;
  }
  return static_cast<std::size_t>(c);
}

}  // namespace ntot

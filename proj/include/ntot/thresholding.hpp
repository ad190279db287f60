#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "ntot/linalg.hpp"

namespace ntot {

/// Strictly increasing set of column indices below a capacity n.
class SupportSet {
 public:
  SupportSet() = default;
  /// Sorts and validates; throws std::invalid_argument on duplicates or
  /// indices >= capacity.
  SupportSet(std::vector<Index> indices, Index capacity);
  SupportSet(std::initializer_list<Index> indices, Index capacity)
      : SupportSet(std::vector<Index>(indices), capacity) {}

  /// supp(x): indices of the nonzero entries.
  static SupportSet of(const Vector& x);

  const std::vector<Index>& indices() const { return indices_; }
  Index capacity() const { return capacity_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(Index i) const;

  SupportSet united(const SupportSet& other) const;
  SupportSet complement() const;

  /// x_S: copy of x with entries outside the set zeroed.
  Vector restrict(const Vector& x) const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
  Index capacity_ = 0;
};

/// L_k(x): indices of the k largest magnitudes; equal magnitudes keep the
/// lower index. Returns min(k, len) indices.
SupportSet top_k_support(const Vector& x, Index k);

/// H_k(x): x restricted to top_k_support(x, k).
Vector hard_threshold(const Vector& x, Index k);

/// Largest number of supports the exhaustive thresholding oracle accepts.
inline constexpr std::size_t kOptimalThresholdGuard = 2'000'000;

struct OptimalThreshold {
  Vector w;  ///< binary mask with k ones
  SupportSet support;
  double objective = 0.0;  ///< ‖y − A(u ⊗ w)‖₂²
};

/// Z_k^#: exhaustive search over all binary w with eᵀw = k for the minimizer
/// of ‖y − A(u ⊗ w)‖₂². Supports are visited in lexicographic order and only
/// a strictly smaller objective replaces the incumbent, so ties resolve to the
/// lexicographically smallest support. Throws GuardViolation when
/// C(n, k) > kOptimalThresholdGuard.
OptimalThreshold exact_optimal_threshold(const DenseMatrix& a, const Vector& u,
                                         const Vector& y, Index k);

}  // namespace ntot

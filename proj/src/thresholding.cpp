#include "ntot/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ntot {

SupportSet::SupportSet(std::vector<Index> indices, Index capacity)
    : indices_(std::move(indices)), capacity_(capacity) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw std::invalid_argument("SupportSet: duplicate index");
  if (!indices_.empty() && (indices_.front() < 0 || indices_.back() >= capacity_))
    throw std::invalid_argument("SupportSet: index out of range");
}

SupportSet SupportSet::of(const Vector& x) {
  std::vector<Index> idx;
  for (Index i = 0; i < x.size(); ++i)
    if (x(i) != 0.0) idx.push_back(i);
  return SupportSet(std::move(idx), x.size());
}

bool SupportSet::contains(Index i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

SupportSet SupportSet::united(const SupportSet& other) const {
  if (other.capacity_ != capacity_)
    throw DimensionMismatch("SupportSet: capacities differ");
  std::vector<Index> out;
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(),
                 other.indices_.end(), std::back_inserter(out));
  return SupportSet(std::move(out), capacity_);
}

SupportSet SupportSet::complement() const {
  std::vector<Index> out;
  for (Index i = 0; i < capacity_; ++i)
    if (!contains(i)) out.push_back(i);
  return SupportSet(std::move(out), capacity_);
}

Vector SupportSet::restrict(const Vector& x) const {
  if (x.size() != capacity_)
    throw DimensionMismatch("SupportSet::restrict: length != capacity");
  Vector out = Vector::Zero(x.size());
  for (Index i : indices_) out(i) = x(i);
  return out;
}

SupportSet top_k_support(const Vector& x, Index k) {
  const Index n = x.size();
  k = std::clamp<Index>(k, 0, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](Index a, Index b) {
                      const double ma = std::abs(x(a));
                      const double mb = std::abs(x(b));
                      return ma > mb || (ma == mb && a < b);
                    });
  order.resize(static_cast<std::size_t>(k));
  return SupportSet(std::move(order), n);
}

Vector hard_threshold(const Vector& x, Index k) {
  return top_k_support(x, k).restrict(x);
}

OptimalThreshold exact_optimal_threshold(const DenseMatrix& a, const Vector& u,
                                         const Vector& y, Index k) {
  const Index n = a.cols();
  const Index m = a.rows();
  if (u.size() != n) throw DimensionMismatch("exact_optimal_threshold: u.len != A.cols");
  if (y.size() != m) throw DimensionMismatch("exact_optimal_threshold: y.len != A.rows");
  if (k < 0 || k > n) throw std::invalid_argument("exact_optimal_threshold: k out of range");
  const auto count = binomial_capped(static_cast<std::size_t>(n),
                                     static_cast<std::size_t>(k),
                                     kOptimalThresholdGuard);
  if (count > kOptimalThresholdGuard) {
    std::ostringstream msg;
    msg << "exact_optimal_threshold: C(" << n << ", " << k
        << ") exceeds the enumeration guard of " << kOptimalThresholdGuard;
    throw GuardViolation(msg.str());
  }

  OptimalThreshold best;
  best.w = Vector::Zero(n);
  if (k == 0) {
    best.support = SupportSet({}, n);
    best.objective = y.squaredNorm();
    return best;
  }

  // Scaled columns u_i a_i; residuals of every prefix of the current
  // support are kept so each visited support costs one m-vector update.
  const Eigen::MatrixXd scaled =
      a.values() * u.asDiagonal();
  std::vector<Index> current(static_cast<std::size_t>(k));
  Eigen::MatrixXd residual(m, k + 1);
  residual.col(0) = y;
  std::vector<Index> best_support;
  double best_obj = std::numeric_limits<double>::infinity();

  // Lexicographic enumeration of k-combinations of [0, n).
  Index depth = 0;
  current[0] = 0;
  while (depth >= 0) {
    const auto d = static_cast<std::size_t>(depth);
    if (current[d] > n - (k - depth)) {
      --depth;
      if (depth >= 0) ++current[static_cast<std::size_t>(depth)];
      continue;
    }
    residual.col(depth + 1) = residual.col(depth) - scaled.col(current[d]);
    if (depth == k - 1) {
      const double obj = residual.col(k).squaredNorm();
      if (obj < best_obj) {
        best_obj = obj;
        best_support = current;
      }
      ++current[d];
    } else {
      current[d + 1] = current[d] + 1;
      ++depth;
    }
  }

  for (Index i : best_support) best.w(i) = 1.0;
  best.objective = (y - a.values() * u.cwiseProduct(best.w)).squaredNorm();
  best.support = SupportSet(std::move(best_support), n);
  return best;
}

}  // namespace ntot

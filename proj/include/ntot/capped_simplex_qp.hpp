#pragma once

#include <optional>
#include <vector>

#include "ntot/linalg.hpp"

namespace ntot {

/// Euclidean projection of v onto the capped simplex
/// {w : eᵀw = k, 0 <= w <= 1}, i.e. w_i = clamp(v_i − τ, 0, 1) with τ chosen
/// so the entries sum to k. τ is located exactly by a sorted scan over the
/// breakpoints v_i and v_i − 1. Requires 1 <= k <= v.size().
Vector project_capped_simplex(const Vector& v, Index k);

/// Relaxed optimal k-thresholding subproblem:
///   min ‖y − A(u ⊗ w)‖₂²  s.t.  eᵀw = k, 0 <= w <= 1.
struct RelaxedOTProblem {
  const DenseMatrix& a;
  const Vector& u;
  const Vector& y;
  Index k;
};

struct QPOptions {
  double tol = 1e-8;
  int max_iter = 5000;
  /// Keep the objective after every accepted iterate in
  /// QPSolution::objective_history.
  bool record_history = false;
};

struct QPSolution {
  Vector w;
  double objective = 0.0;  ///< exact ‖y − A(u ⊗ w)‖₂² at the returned w
  int iterations = 0;
  bool converged = false;
  /// ‖w − P(w − ∇f(w)/L)‖₂ at the returned w.
  double kkt_residual = 0.0;
  std::vector<double> objective_history;
};

/// Accelerated projected gradient with a monotone restart: momentum is
/// dropped whenever an extrapolated step would increase the objective, and
/// the step 1/L is backtracked if the sufficient-decrease test fails.
/// L starts at 2.02 * (power-iteration estimate of σ_max(A diag(u)))².
/// `warm_start` is projected onto the feasible set before use; without it the
/// iteration starts at (k/n) e.
QPSolution solve_relaxed_ot(const RelaxedOTProblem& problem,
                            const QPOptions& options = {},
                            const std::optional<Vector>& warm_start = std::nullopt);

}  // namespace ntot

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ntot/capped_simplex_qp.hpp"
#include "ntot/linalg.hpp"
#include "ntot/thresholding.hpp"

namespace ntot {

enum class Variant { kNTOT, kNTROT, kNTROTP, kIHT, kNSIHT, kNSHTP, kOMP, kSP };

/// Lower-case tag used on the command line and in CSV output ("ntrotp").
std::string_view variant_name(Variant v);
/// Inverse of variant_name; throws ConfigError for unknown tags.
Variant parse_variant(std::string_view tag);
/// True for the variants that solve the relaxed thresholding QP.
bool uses_qp(Variant v);

enum class StopRule { kRelativeError, kResidual, kIterationCapOnly };
std::string_view stop_rule_name(StopRule r);
StopRule parse_stop_rule(std::string_view tag);

struct SolverConfig {
  Variant variant = Variant::kNTROTP;
  double eps = 1.0;
  double lambda = 5.0;
  int max_outer_iter = 50;
  double qp_tol = 1e-8;
  int qp_max_iter = 5000;
  StopRule stop_rule = StopRule::kResidual;
  double stop_tol = 1e-6;
  /// Starting point; zero when absent.
  std::optional<Vector> x0;
  /// Keep every iterate in the trace (needed for contraction replays).
  bool record_iterates = false;
};

/// y = A x* + η with sparsity level k.
struct RecoveryProblem {
  DenseMatrix a;
  Vector y;
  Index k = 0;
  std::optional<Vector> x_true;
  std::optional<Vector> noise;

  /// Throws DimensionMismatch / std::invalid_argument on inconsistent data.
  void validate() const;
};

struct TraceRecord {
  int iteration = 0;
  double residual = 0.0;  ///< ‖y − A x^p‖₂
  /// ‖x^p − x*‖₂ / ‖x*‖₂ (absolute error when x* = 0); absent without x*.
  std::optional<double> relative_error;
  int qp_iterations = 0;
  bool qp_converged = true;
  /// Residual of the thresholded iterate before the pursuit step, on the
  /// support the pursuit used (NTROTP, NSHTP only).
  std::optional<double> pre_pursuit_residual;
  /// x^p, kept when SolverConfig::record_iterates is set.
  std::optional<Vector> iterate;
};

enum class SolveStatus { kConverged, kIterationCap, kNumericalFailure };
std::string_view status_name(SolveStatus s);

struct SolveResult {
  Vector x_hat;
  SupportSet support;
  /// Record 0 describes the starting point; record p the p-th iterate.
  std::vector<TraceRecord> trace;
  SolveStatus status = SolveStatus::kIterationCap;
  std::string failure_message;

  /// Outer iterations performed.
  int iterations() const { return trace.empty() ? 0 : trace.back().iteration; }
};

enum class StopDecision { kContinue, kConverged, kIterationCap };

/// Stopping rule applied after every outer iteration. The relative-error
/// rule stops at ‖x^p − x*‖/‖x*‖ <= stop_tol, the residual rule at
/// ‖y − Ax^p‖ <= stop_tol·‖y‖; the iteration cap always applies. Throws
/// ConfigError for the relative-error rule without ground truth.
StopDecision stopping_check(const TraceRecord& record,
                            const RecoveryProblem& problem,
                            const SolverConfig& config);

/// Newton-type optimal k-thresholding with the exhaustive binary subproblem.
/// Throws GuardViolation when C(n, k) exceeds the enumeration guard.
SolveResult run_ntot(const RecoveryProblem& p, const SolverConfig& c);
/// Newton step, relaxed QP, hard thresholding of u ⊗ w.
SolveResult run_ntrot(const RecoveryProblem& p, const SolverConfig& c);
/// Newton step, relaxed QP, least squares on L_k(u ⊗ w).
SolveResult run_ntrotp(const RecoveryProblem& p, const SolverConfig& c);
/// x ← H_k(x + λAᵀ(y − Ax)).
SolveResult run_iht(const RecoveryProblem& p, const SolverConfig& c);
/// x ← H_k(x + λ(AᵀA + εI)⁻¹Aᵀ(y − Ax)).
SolveResult run_nsiht(const RecoveryProblem& p, const SolverConfig& c);
/// NSIHT iterate, then least squares on its top-k support.
SolveResult run_nshtp(const RecoveryProblem& p, const SolverConfig& c);
/// Orthogonal matching pursuit; exactly k greedy iterations.
SolveResult run_omp(const RecoveryProblem& p, const SolverConfig& c);
/// Subspace pursuit; stops when the residual decreases by less than 1e-12.
SolveResult run_sp(const RecoveryProblem& p, const SolverConfig& c);

/// Dispatches on c.variant.
SolveResult solve(const RecoveryProblem& p, const SolverConfig& c);

/// Config with the default parameter rule λ = 5,
/// ε = max{σ₁² + 1, λ − σ_min²} for this matrix.
SolverConfig default_config(const DenseMatrix& a, Variant variant);

}  // namespace ntot

#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>

#include "ntot/linalg.hpp"
#include "ntot/solvers.hpp"
#include "ntot/thresholding.hpp"

namespace ntot {

/// Largest number of supports exact_ric will enumerate.
inline constexpr std::size_t kRicGuard = 200'000;

/// Stepsize of the default parameter rule.
inline constexpr double kDefaultLambda = 5.0;

/// Sufficient RIC bounds of the three convergence theorems.
inline constexpr double kTheorem1Delta2kBound = 0.5349;
inline constexpr double kTheorem2Delta3kBound = 0.2119;
inline constexpr double kTheorem3Delta3kBound = 0.2;

struct RICResult {
  Index order = 0;
  double delta = 0.0;
  SupportSet witness_support;
  std::size_t supports_enumerated = 0;
};

/// δ_q = max over |S| = q of max(λ_max(A_SᵀA_S) − 1, 1 − λ_min(A_SᵀA_S)).
/// Orders above n are evaluated at n (every q-sparse vector is n-sparse).
/// Ties keep the lexicographically smallest witness. Throws GuardViolation
/// when C(n, q) > kRicGuard.
RICResult exact_ric(const DenseMatrix& a, Index q);

/// RICs of orders k, 2k and (optionally) 3k.
struct RipConstants {
  double delta_k = 0.0;
  double delta_2k = 0.0;
  std::optional<double> delta_3k;
};

RipConstants compute_rip_constants(const DenseMatrix& a, Index k, bool with_3k);

struct TheoremCertificate {
  int theorem_id = 1;
  RipConstants deltas;
  SpectralBounds sigma;
  double eps = 0.0;
  double lambda = 0.0;
  double eps_lower_bound = 0.0;
  double lambda_lower = 0.0;  ///< exclusive
  double lambda_upper = 0.0;  ///< inclusive
  double rho = 0.0;
  double tau = 0.0;
  bool delta_ok = false;
  bool eps_ok = false;
  bool lambda_ok = false;
  /// All conditions met (and hence rho < 1).
  bool valid = false;
};

/// Certificates from precomputed constants. For theorems 2 and 3,
/// deltas.delta_3k must be set.
TheoremCertificate theorem1_certificate(const RipConstants& d, const SpectralBounds& s,
                                        double eps, double lambda);
TheoremCertificate theorem2_certificate(const RipConstants& d, const SpectralBounds& s,
                                        double eps, double lambda);
TheoremCertificate theorem3_certificate(const RipConstants& d, const SpectralBounds& s,
                                        double eps, double lambda);

/// Certificates computing exact RICs and singular values of A.
TheoremCertificate theorem1_certificate(const DenseMatrix& a, Index k, double eps,
                                        double lambda);
TheoremCertificate theorem2_certificate(const DenseMatrix& a, Index k, double eps,
                                        double lambda);
TheoremCertificate theorem3_certificate(const DenseMatrix& a, Index k, double eps,
                                        double lambda);

/// Flat "key=value" report, one entry per line.
void write_certificate(std::ostream& out, const TheoremCertificate& cert);

/// ε = max{σ₁² + 1, λ − σ_min²}; the result satisfies ε > σ₁² and
/// λ <= ε + σ_min².
double default_parameters(const SpectralBounds& s, double lambda);
double default_parameters(const DenseMatrix& a, double lambda);

struct ContractionReport {
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
  /// max over p of lhs − rhs (negative when every step has room to spare).
  double max_violation = -std::numeric_limits<double>::infinity();
  /// ‖A x_S̄ + η‖₂ with S = L_k(x*).
  double effective_noise = 0.0;
};

/// Replays ‖x^{p+1} − x_S‖ <= ρ‖x^p − x_S‖ + τ‖Ax_S̄ + η‖ over consecutive
/// trace iterates. The effective noise is computed as y − A x_S. Requires
/// problem.x_true, a valid certificate and a trace with recorded iterates
/// (ConfigError otherwise).
ContractionReport replay_contraction(const SolveResult& result,
                                     const RecoveryProblem& problem,
                                     const TheoremCertificate& cert,
                                     double slack = 1e-8);

/// Checks ‖x^p − x*‖ <= ρ^p ‖x⁰ − x*‖ at every recorded iterate.
ContractionReport replay_geometric_decay(const SolveResult& result, const Vector& x_true,
                                         double rho, double slack = 1e-8);

struct InequalityReport {
  bool applicable = true;  ///< preconditions of the bound hold
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds(double slack) const { return !applicable || lhs <= rhs + slack; }
};

/// ‖[(I − λ(AᵀA+εI)⁻¹AᵀA)u]_Ω‖ <= (δ_t + σ₁² − λσ₁²/(ε+σ₁²))‖u‖.
/// Not applicable unless ε > σ₁², λ <= ε + σ_min² and |Ω ∪ supp(u)| <= t.
InequalityReport lemma1_check(const DenseMatrix& a, double eps, double lambda,
                              const Vector& u, const SupportSet& omega, Index t);
/// Same with δ_t and σ supplied by the caller.
InequalityReport lemma1_check(const DenseMatrix& a, double eps, double lambda,
                              const Vector& u, const SupportSet& omega, Index t,
                              double delta_t, const SpectralBounds& sigma);

/// ‖(AᵀA+εI)⁻¹Aᵀu‖ <= σ₁/(ε+σ₁²)·‖u‖; applicable for ε >= σ₁².
InequalityReport tail_bound_check(const DenseMatrix& a, double eps, const Vector& u,
                                  const SpectralBounds& sigma);

/// For y = A x̂ + η with k-sparse x̂ and a binary k-sparse ŵ covering
/// supp(x̂):
///   ‖Z_k^#(u) − x̂‖ <= √((1+δ_k)/(1−δ_2k))‖(x̂ − u) ⊗ ŵ‖ + 2/√(1−δ_2k)‖η‖.
/// Not applicable when δ_2k >= 1 or ŵ does not cover supp(x̂).
InequalityReport lemma2_check(const DenseMatrix& a, const Vector& x_hat,
                              const Vector& eta, const Vector& u,
                              const SupportSet& w_hat, Index k,
                              const RipConstants& deltas);

}  // namespace ntot

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "ntot/rip_analysis.hpp"
#include "ntot/solvers.hpp"

namespace ntot {

/// Recovery threshold on ‖x − x*‖/‖x*‖ used by every study.
inline constexpr double kRecoveryTolerance = 1e-3;

/// Gaussian ensemble: A and the nonzeros of x* i.i.d. N(0, 1), support
/// uniform over all C(n, k) supports, y = A x* + noise_scale·θ.
struct ProblemSpec {
  Index m = 64;
  Index n = 128;
  Index k = 5;
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

/// Draw order from the seed: A row-major, the support (partial Fisher–Yates
/// over [0, n)), the k nonzeros, then θ (always drawn, so problems that
/// differ only in noise_scale share A and x*).
RecoveryProblem gen_problem(const ProblemSpec& spec);

struct TrialRecord {
  ProblemSpec spec;
  Variant algorithm = Variant::kNTROTP;
  int iterations_used = 0;
  bool success = false;
  double final_residual = 0.0;
  double final_relative_error = 0.0;
};

enum class SweepAxis { kKOverN, kMOverN };
std::string_view axis_name(SweepAxis axis);
SweepAxis parse_axis(std::string_view tag);

struct SweepSpec {
  SweepAxis axis = SweepAxis::kKOverN;
  std::vector<double> grid;
  int trials_per_point = 20;
  std::vector<Variant> algorithms;
  /// Dimensions not driven by the axis (k for the m/n axis, m for k/n).
  Index m = 64;
  Index n = 128;
  Index k = 5;
  std::uint64_t base_seed = 0;
  /// Outer iteration cap (OMP always performs k iterations).
  int max_iter = 50;
  /// Overrides of the default (ε, λ) rule.
  std::optional<double> lambda;
  std::optional<double> eps;
  double qp_tol = 1e-8;
  int qp_max_iter = 5000;
  /// Threads used to run trials; results never depend on it.
  int workers = 1;
  /// Solver hook for every finished run (e.g. invariant checks). Called from
  /// worker threads.
  std::function<void(const RecoveryProblem&, const SolverConfig&, const SolveResult&)>
      observer;
};

/// `points` evenly spaced values from `from` to `to` inclusive.
std::vector<double> linspace(double from, double to, int points);

/// Problem of trial `trial` at grid index `point`; k = round(v·n) or
/// m = round(v·n), at least 1.
ProblemSpec sweep_problem(const SweepSpec& sweep, std::size_t point, int trial,
                          double noise_scale);

struct IterationRow {
  Variant algorithm;
  SweepAxis axis;
  double axis_value;
  double avg_iterations;
};

struct SuccessRow {
  Variant algorithm;
  SweepAxis axis;
  double axis_value;
  int trials;
  int successes;
  double success_rate;
};

template <class Row>
struct SweepTable {
  /// Ordered by (algorithm, grid point).
  std::vector<Row> rows;
  /// Ordered by (algorithm, grid point, trial).
  std::vector<TrialRecord> trials;
};

/// Average outer iterations to reach relative error <= 1e-3 (cap
/// sweep.max_iter); trials that never get there count as the cap.
SweepTable<IterationRow> iterations_experiment(const SweepSpec& sweep);

/// Fraction of trials ending with relative error <= 1e-3 after exactly
/// sweep.max_iter iterations (k for OMP, SP may stop at a stall).
SweepTable<SuccessRow> success_experiment(const SweepSpec& sweep, double noise_scale);

/// How ε is chosen for one residual-study curve.
struct ParameterChoice {
  double lambda = kDefaultLambda;
  enum class Eps { kDefaultRule, kExplicit, kScaledBase } eps_mode = Eps::kDefaultRule;
  /// kExplicit: ε itself; kScaledBase: factor applied to σ₁² + 1.
  double eps_value = 1.0;
};

struct ResidualStudy {
  ProblemSpec problem;
  std::vector<Variant> algorithms;
  std::vector<ParameterChoice> parameters{ParameterChoice{}};
  int max_iter = 30;
  double qp_tol = 1e-8;
  int qp_max_iter = 5000;
};

struct ResidualRow {
  double eps;
  double lambda;
  Variant algorithm;
  TraceRecord record;
};

/// One row per (parameter choice, algorithm, iteration), runs capped at
/// max_iter without early stopping.
std::vector<ResidualRow> residual_experiment(const ResidualStudy& study);

/// Runs fn(i) for i in [0, count) on `workers` threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

/// Small instance whose sensing matrix satisfies the hypotheses of the
/// requested theorem, with (ε, λ) inside the certified ranges.
struct CertifiedInstance {
  RecoveryProblem problem;
  TheoremCertificate certificate;
  SolverConfig config;
  int attempts = 0;
};

struct CertifiedInstanceSpec {
  int theorem = 1;
  Index m = 9;
  Index n = 10;
  Index k = 1;
  /// Scale of the off-support tail added to x and of the measurement noise.
  double perturbation = 0.0;
  std::uint64_t seed = 0;
};

/// Near-isometric A: orthonormal rows spanning the complement of a nearly
/// flat unit vector, rescaled to balance the RIC and jittered by 1e-3
/// Gaussian entries. Resamples until the certificate is valid (throws
/// NumericalFailure after 1000 attempts).
CertifiedInstance gen_certified_instance(const CertifiedInstanceSpec& spec);

}  // namespace ntot

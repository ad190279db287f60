#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ntot/solvers.hpp"
#include "ntot/thresholding.hpp"

namespace ntot {

/// Outcome of one oracle suite: every individual comparison counts as a check.
struct SuiteResult {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  /// Human-readable summary lines (statistics, first failures).
  std::vector<std::string> notes;
  double seconds = 0.0;

  bool passed() const { return checks > 0 && failures == 0; }
  void expect(bool ok, const std::string& what);
};

/// Top-k selection used by the thresholding suite; swapped out to inject a
/// faulty tie rule.
using TopKRule = std::function<SupportSet(const Vector&, Index)>;

/// Top-k selection that keeps the highest index among equal magnitudes.
SupportSet top_k_highest_index(const Vector& x, Index k);

/// Relaxed QP objective never exceeds the exhaustive binary optimum (+1e-8),
/// and rounding the relaxed mask recovers the binary support on at least
/// 10% of the instances.
SuiteResult p1_relaxation_suite(std::uint64_t seed, int instances = 200);

/// Feasibility, idempotence and nonexpansiveness of the capped-simplex
/// projection on random pairs, plus agreement with a refined grid search on
/// n <= 4.
SuiteResult projection_suite(std::uint64_t seed, int pairs = 1000, int grid_instances = 40);

/// Newton tail bound and Lemma 1 on `draws` precondition-satisfying draws,
/// Lemma 2 on `lemma2_instances` enumerable instances with exact RICs.
SuiteResult inequality_suite(std::uint64_t seed, int draws = 1000, int lemma2_instances = 200);

/// Per-theorem certified instances solved by the matching algorithm:
/// one-step contraction replay and geometric decay of noiseless runs.
/// `runs` collects every solve for further checks when non-null.
struct CertifiedRun {
  RecoveryProblem problem;
  SolverConfig config;
  SolveResult result;
};
SuiteResult contraction_suite(std::uint64_t seed, int instances_per_theorem = 50,
                              std::vector<CertifiedRun>* runs = nullptr);

/// Lowest-index tie rule of L_k / H_k and lexicographic ties of Z_k^#.
SuiteResult thresholding_suite(std::uint64_t seed, const TopKRule& rule = top_k_support);

/// Pursuit never increases the residual on its support and every iterate is
/// k-sparse. Returns the number of violations found in one run.
std::size_t pursuit_and_sparsity_violations(const SolveResult& result, Variant variant, Index k,
                                            double slack = 1e-9);

inline constexpr std::string_view kSuiteNames[] = {"p1", "projection", "inequalities",
                                                  "contraction", "thresholding"};

/// Runs the named suites ("all" for every suite), printing one line per suite
/// and the notes. Returns true when all suites pass. `inject_tie_fault`
/// replaces the thresholding suite's tie rule with the highest-index one.
bool run_oracle_suites(const std::vector<std::string>& names, std::uint64_t seed,
                       bool inject_tie_fault, std::ostream& out);

}  // namespace ntot

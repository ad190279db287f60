#include "ntot/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ntot/rip_analysis.hpp"

namespace ntot {

namespace {

constexpr std::string_view kVariantNames[] = {"ntot",  "ntrot", "ntrotp", "iht",
                                              "nsiht", "nshtp", "omp",    "sp"};

constexpr double kSubspacePursuitStall = 1e-12;

double relative_error(const Vector& x, const Vector& truth) {
  const double scale = truth.norm();
  const double err = (x - truth).norm();
  return scale > 0.0 ? err / scale : err;
}

struct StepOutcome {
  StepOutcome() = default;
  explicit StepOutcome(Vector next) : x(std::move(next)) {}

  Vector x;
  int qp_iterations = 0;
  bool qp_converged = true;
  std::optional<double> pre_pursuit_residual;
  bool stop = false;  // algorithm-specific termination (SP stall)
};

using Step = std::function<StepOutcome(const Vector& x)>;

void check_config(const RecoveryProblem& p, const SolverConfig& c, bool newton) {
  p.validate();
  if (newton && !(c.eps > 0.0 && std::isfinite(c.eps)))
    throw ConfigError("solver: eps must be positive");
  if (!(c.lambda >= 0.0 && std::isfinite(c.lambda)))
    throw ConfigError("solver: lambda must be nonnegative");
  if (c.max_outer_iter < 1) throw ConfigError("solver: max_outer_iter must be >= 1");
  if (c.stop_rule == StopRule::kRelativeError && !p.x_true)
    throw ConfigError("solver: relative-error stopping rule needs x_true");
  if (c.x0 && c.x0->size() != p.a.cols())
    throw DimensionMismatch("solver: x0 length != A.cols");
}

TraceRecord make_record(int iteration, const RecoveryProblem& p, const Vector& x,
                        const SolverConfig& c) {
  TraceRecord rec;
  rec.iteration = iteration;
  rec.residual = (p.y - p.a.values() * x).norm();
  if (p.x_true) rec.relative_error = relative_error(x, *p.x_true);
  if (c.record_iterates) rec.iterate = x;
  return rec;
}

// Shared outer loop: trace bookkeeping, stopping and failure capture.
SolveResult iterate(const RecoveryProblem& p, const SolverConfig& c, const Step& step,
                    int max_iter) {
  SolveResult result;
  Vector x = c.x0 ? *c.x0 : Vector::Zero(p.a.cols());
  result.trace.push_back(make_record(0, p, x, c));
  SolverConfig capped = c;
  capped.max_outer_iter = max_iter;
  for (int it = 1; it <= max_iter; ++it) {
    StepOutcome outcome;
    try {
      outcome = step(x);
      if (!outcome.x.allFinite()) throw NumericalFailure("solver: non-finite iterate");
    } catch (const NumericalFailure& e) {
      result.status = SolveStatus::kNumericalFailure;
      result.failure_message = e.what();
      break;
    }
    x = std::move(outcome.x);
    TraceRecord rec = make_record(it, p, x, c);
    rec.qp_iterations = outcome.qp_iterations;
    rec.qp_converged = outcome.qp_converged;
    rec.pre_pursuit_residual = outcome.pre_pursuit_residual;
    const StopDecision decision = stopping_check(rec, p, capped);
    result.trace.push_back(std::move(rec));
    if (outcome.stop || decision == StopDecision::kConverged) {
      result.status = SolveStatus::kConverged;
      break;
    }
    if (decision == StopDecision::kIterationCap) {
      result.status = SolveStatus::kIterationCap;
      break;
    }
  }
  result.x_hat = std::move(x);
  result.support = SupportSet::of(result.x_hat);
  return result;
}

double residual_of(const RecoveryProblem& p, const Vector& x) {
  return (p.y - p.a.values() * x).norm();
}

// Newton step u = x + λ d with d from the factorization shared by the run.
struct NewtonStep {
  const RecoveryProblem& p;
  double lambda;
  NewtonDirection direction;

  NewtonStep(const RecoveryProblem& problem, const SolverConfig& c)
      : p(problem), lambda(c.lambda), direction(problem.a, c.eps) {}

  Vector operator()(const Vector& x) const {
    return x + lambda * direction.apply(p.y - p.a.values() * x);
  }
};

// Relaxed-QP state carried across outer iterations for warm starts.
struct RelaxedThreshold {
  const RecoveryProblem& p;
  QPOptions options;
  std::optional<Vector> warm;

  QPSolution operator()(const Vector& u) {
    QPSolution sol = solve_relaxed_ot({p.a, u, p.y, p.k}, options, warm);
    warm = sol.w;
    return sol;
  }
};

QPOptions qp_options(const SolverConfig& c) {
  QPOptions o;
  o.tol = c.qp_tol;
  o.max_iter = c.qp_max_iter;
  return o;
}

}  // namespace

std::string_view variant_name(Variant v) {
  return kVariantNames[static_cast<int>(v)];
}

Variant parse_variant(std::string_view tag) {
  for (int i = 0; i < 8; ++i)
    if (kVariantNames[i] == tag) return static_cast<Variant>(i);
  throw ConfigError("unknown algorithm '" + std::string(tag) + "'");
}

bool uses_qp(Variant v) { return v == Variant::kNTROT || v == Variant::kNTROTP; }

std::string_view stop_rule_name(StopRule r) {
  switch (r) {
    case StopRule::kRelativeError: return "relative-error";
    case StopRule::kResidual: return "residual";
    case StopRule::kIterationCapOnly: return "iteration-cap-only";
  }
  return "?";
}

StopRule parse_stop_rule(std::string_view tag) {
  if (tag == "relative-error") return StopRule::kRelativeError;
  if (tag == "residual") return StopRule::kResidual;
  if (tag == "iteration-cap-only") return StopRule::kIterationCapOnly;
  throw ConfigError("unknown stopping rule '" + std::string(tag) + "'");
}

std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kIterationCap: return "iteration-cap";
    case SolveStatus::kNumericalFailure: return "numerical-failure";
  }
  return "?";
}

void RecoveryProblem::validate() const {
  if (y.size() != a.rows()) throw DimensionMismatch("problem: y.len != A.rows");
  if (k < 0 || k > a.cols()) throw std::invalid_argument("problem: k must lie in [0, n]");
  if (x_true && x_true->size() != a.cols())
    throw DimensionMismatch("problem: x_true.len != A.cols");
  if (noise && noise->size() != a.rows())
    throw DimensionMismatch("problem: noise.len != A.rows");
  require_finite(y, "problem y");
}

StopDecision stopping_check(const TraceRecord& record, const RecoveryProblem& problem,
                            const SolverConfig& config) {
  switch (config.stop_rule) {
    case StopRule::kRelativeError:
      if (!problem.x_true || !record.relative_error)
        throw ConfigError("relative-error stopping rule needs x_true");
      if (*record.relative_error <= config.stop_tol) return StopDecision::kConverged;
      break;
    case StopRule::kResidual:
      if (record.residual <= config.stop_tol * problem.y.norm())
        return StopDecision::kConverged;
      break;
    case StopRule::kIterationCapOnly:
      break;
  }
  if (record.iteration >= config.max_outer_iter) return StopDecision::kIterationCap;
  return StopDecision::kContinue;
}

SolveResult run_ntot(const RecoveryProblem& p, const SolverConfig& c) {
  check_config(p, c, true);
  const auto n = static_cast<std::size_t>(p.a.cols());
  const auto k = static_cast<std::size_t>(p.k);
  if (binomial_capped(n, k, kOptimalThresholdGuard) > kOptimalThresholdGuard) {
    std::ostringstream msg;
    msg << "ntot: C(" << n << ", " << k << ") exceeds the exhaustive-search guard";
    throw GuardViolation(msg.str());
  }
  NewtonStep newton(p, c);
  return iterate(p, c, [&](const Vector& x) {
    const Vector u = newton(x);
    const OptimalThreshold best = exact_optimal_threshold(p.a, u, p.y, p.k);
    return StepOutcome{u.cwiseProduct(best.w)};
  }, c.max_outer_iter);
}

SolveResult run_ntrot(const RecoveryProblem& p, const SolverConfig& c) {
  check_config(p, c, true);
  NewtonStep newton(p, c);
  RelaxedThreshold relaxed{p, qp_options(c), std::nullopt};
  return iterate(p, c, [&](const Vector& x) {
    if (p.k == 0) return StepOutcome{Vector::Zero(x.size())};
    const Vector u = newton(x);
    const QPSolution qp = relaxed(u);
    StepOutcome out{hard_threshold(u.cwiseProduct(qp.w), p.k)};
    out.qp_iterations = qp.iterations;
    out.qp_converged = qp.converged;
    return out;
  }, c.max_outer_iter);
}

SolveResult run_ntrotp(const RecoveryProblem& p, const SolverConfig& c) {
  check_config(p, c, true);
  NewtonStep newton(p, c);
  RelaxedThreshold relaxed{p, qp_options(c), std::nullopt};
  return iterate(p, c, [&](const Vector& x) {
    if (p.k == 0) return StepOutcome{Vector::Zero(x.size())};
    const Vector u = newton(x);
    const QPSolution qp = relaxed(u);
    const Vector uw = u.cwiseProduct(qp.w);
    const SupportSet support = top_k_support(uw, p.k);
    StepOutcome out{least_squares_on_support(p.a, p.y, support)};
    out.qp_iterations = qp.iterations;
    out.qp_converged = qp.converged;
    out.pre_pursuit_residual = residual_of(p, support.restrict(uw));
    return out;
  }, c.max_outer_iter);
}

SolveResult run_iht(const RecoveryProblem& p, const SolverConfig& c) {
  check_config(p, c, false);
  return iterate(p, c, [&](const Vector& x) {
    const Vector v = x + c.lambda * (p.a.values().transpose() * (p.y - p.a.values() * x));
    return StepOutcome{hard_threshold(v, p.k)};
  }, c.max_outer_iter);
}

SolveResult run_nsiht(const RecoveryProblem& p, const SolverConfig& c) {
  check_config(p, c, true);
  NewtonStep newton(p, c);
  return iterate(p, c, [&](const Vector& x) {
    return StepOutcome{hard_threshold(newton(x), p.k)};
  }, c.max_outer_iter);
}

SolveResult run_nshtp(const RecoveryProblem& p, const SolverConfig& c) {
  check_config(p, c, true);
  NewtonStep newton(p, c);
  return iterate(p, c, [&](const Vector& x) {
    const Vector v = newton(x);
    const SupportSet support = top_k_support(v, p.k);
    StepOutcome out{least_squares_on_support(p.a, p.y, support)};
    out.pre_pursuit_residual = residual_of(p, support.restrict(v));
    return out;
  }, c.max_outer_iter);
}

SolveResult run_omp(const RecoveryProblem& p, const SolverConfig& c) {
  check_config(p, c, false);
  const Index n = p.a.cols();
  std::vector<Index> chosen;
  auto step = [&](const Vector& x) {
    const Vector corr = p.a.values().transpose() * (p.y - p.a.values() * x);
    Index pick = -1;
    double best = -1.0;
    for (Index j = 0; j < n; ++j) {
      if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
      if (std::abs(corr(j)) > best) {
        best = std::abs(corr(j));
        pick = j;
      }
    }
    chosen.push_back(pick);
    return StepOutcome{least_squares_on_support(p.a, p.y, SupportSet(chosen, n))};
  };
  if (p.k == 0) {
    SolveResult result;
    result.x_hat = c.x0 ? hard_threshold(*c.x0, 0) : Vector::Zero(n);
    result.trace.push_back(make_record(0, p, result.x_hat, c));
    result.support = SupportSet({}, n);
    result.status = SolveStatus::kConverged;
    return result;
  }
  // OMP always runs exactly k greedy steps; the stopping rule is not consulted.
  SolverConfig greedy = c;
  greedy.stop_rule = StopRule::kIterationCapOnly;
  SolveResult result = iterate(p, greedy, step, static_cast<int>(p.k));
  if (result.status == SolveStatus::kIterationCap) result.status = SolveStatus::kConverged;
  return result;
}

SolveResult run_sp(const RecoveryProblem& p, const SolverConfig& c) {
  check_config(p, c, false);
  const Index n = p.a.cols();
  SupportSet current({}, n);
  return iterate(p, c, [&](const Vector& x) {
    const double before = residual_of(p, x);
    const Vector proxy = p.a.values().transpose() * (p.y - p.a.values() * x);
    const SupportSet merged = current.united(top_k_support(proxy, p.k));
    const Vector wide = least_squares_on_support(p.a, p.y, merged);
    const SupportSet pruned = top_k_support(wide, p.k);
    Vector next = least_squares_on_support(p.a, p.y, pruned);
    const double after = residual_of(p, next);
    StepOutcome out;
    if (after > before - kSubspacePursuitStall) {
      out.stop = true;
      // A larger residual keeps the previous estimate.
      out.x = after > before ? x : std::move(next);
      if (after <= before) current = pruned;
      return out;
    }
    current = pruned;
    out.x = std::move(next);
    return out;
  }, c.max_outer_iter);
}

SolveResult solve(const RecoveryProblem& p, const SolverConfig& c) {
  switch (c.variant) {
    case Variant::kNTOT: return run_ntot(p, c);
    case Variant::kNTROT: return run_ntrot(p, c);
    case Variant::kNTROTP: return run_ntrotp(p, c);
    case Variant::kIHT: return run_iht(p, c);
    case Variant::kNSIHT: return run_nsiht(p, c);
    case Variant::kNSHTP: return run_nshtp(p, c);
    case Variant::kOMP: return run_omp(p, c);
    case Variant::kSP: return run_sp(p, c);
  }
  throw ConfigError("solve: unknown variant");
}

SolverConfig default_config(const DenseMatrix& a, Variant variant) {
  SolverConfig c;
  c.variant = variant;
  c.lambda = kDefaultLambda;
  c.eps = default_parameters(spectral_extremes(a), c.lambda);
  return c;
}

}  // namespace ntot

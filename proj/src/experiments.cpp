#include "ntot/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "ntot/random.hpp"

namespace ntot {

namespace {

struct TrialSlot {
  TrialRecord record;
};

Index scaled_count(double ratio, Index n) {
  return std::max<Index>(1, static_cast<Index>(std::llround(ratio * static_cast<double>(n))));
}

SolverConfig sweep_config(const SweepSpec& sweep, Variant variant, const SpectralBounds& sigma,
                          StopRule rule) {
  SolverConfig c;
  c.variant = variant;
  c.lambda = sweep.lambda.value_or(kDefaultLambda);
  c.eps = sweep.eps ? *sweep.eps : default_parameters(sigma, c.lambda);
  c.max_outer_iter = sweep.max_iter;
  c.qp_tol = sweep.qp_tol;
  c.qp_max_iter = sweep.qp_max_iter;
  c.stop_rule = rule;
  c.stop_tol = kRecoveryTolerance;
  return c;
}

// Runs every algorithm on every (grid point, trial) problem. Records are laid
// out as [algorithm][point][trial].
std::vector<TrialRecord> run_trials(const SweepSpec& sweep, double noise_scale, StopRule rule) {
  if (sweep.grid.empty()) throw ConfigError("sweep: grid is empty");
  if (sweep.trials_per_point < 1) throw ConfigError("sweep: trials must be >= 1");
  if (sweep.algorithms.empty()) throw ConfigError("sweep: no algorithms");
  const std::size_t points = sweep.grid.size();
  const auto trials = static_cast<std::size_t>(sweep.trials_per_point);
  const std::size_t algos = sweep.algorithms.size();
  std::vector<TrialRecord> records(algos * points * trials);

  parallel_for(points * trials, sweep.workers, [&](std::size_t task) {
    const std::size_t point = task / trials;
    const int trial = static_cast<int>(task % trials);
    const ProblemSpec spec = sweep_problem(sweep, point, trial, noise_scale);
    const RecoveryProblem problem = gen_problem(spec);
    const SpectralBounds sigma = spectral_extremes(problem.a);
    for (std::size_t ai = 0; ai < algos; ++ai) {
      const SolverConfig config = sweep_config(sweep, sweep.algorithms[ai], sigma, rule);
      const SolveResult result = solve(problem, config);
      if (sweep.observer) sweep.observer(problem, config, result);
      TrialRecord& rec = records[(ai * points + point) * trials + static_cast<std::size_t>(trial)];
      rec.spec = spec;
      rec.algorithm = sweep.algorithms[ai];
      rec.final_residual = result.trace.back().residual;
      rec.final_relative_error = *result.trace.back().relative_error;
      rec.success = rec.final_relative_error <= kRecoveryTolerance;
      rec.iterations_used = result.iterations();
    }
  });
  return records;
}

}  // namespace

std::string_view axis_name(SweepAxis axis) {
  return axis == SweepAxis::kKOverN ? "k_over_n" : "m_over_n";
}

SweepAxis parse_axis(std::string_view tag) {
  if (tag == "k_over_n") return SweepAxis::kKOverN;
  if (tag == "m_over_n") return SweepAxis::kMOverN;
  throw ConfigError("unknown axis '" + std::string(tag) + "'");
}

RecoveryProblem gen_problem(const ProblemSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw ConfigError("gen_problem: m and n must be >= 1");
  if (spec.k < 0 || spec.k > spec.n) throw ConfigError("gen_problem: k must lie in [0, n]");
  if (!(spec.noise_scale >= 0.0)) throw ConfigError("gen_problem: noise_scale must be >= 0");
  Rng rng(spec.seed);
  RowMajorMatrix a(spec.m, spec.n);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();

  std::vector<Index> perm(static_cast<std::size_t>(spec.n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < spec.k; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(spec.n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  Vector x = Vector::Zero(spec.n);
  for (Index i = 0; i < spec.k; ++i) x(perm[static_cast<std::size_t>(i)]) = rng.normal();

  Vector theta(spec.m);
  for (Index i = 0; i < spec.m; ++i) theta(i) = rng.normal();

  RecoveryProblem p{DenseMatrix(std::move(a)), Vector(), spec.k, x, std::nullopt};
  p.y = p.a.values() * x;
  if (spec.noise_scale > 0.0) {
    p.noise = spec.noise_scale * theta;
    p.y += *p.noise;
  }
  return p;
}

std::vector<double> linspace(double from, double to, int points) {
  if (points < 1) throw ConfigError("linspace: points must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = from;
    return out;
  }
  for (int i = 0; i < points; ++i)
    out[static_cast<std::size_t>(i)] = from + (to - from) * i / (points - 1);
  return out;
}

ProblemSpec sweep_problem(const SweepSpec& sweep, std::size_t point, int trial,
                          double noise_scale) {
  ProblemSpec spec;
  spec.n = sweep.n;
  spec.m = sweep.m;
  spec.k = sweep.k;
  const double value = sweep.grid.at(point);
  if (sweep.axis == SweepAxis::kKOverN)
    spec.k = std::min(scaled_count(value, sweep.n), sweep.n);
  else
    spec.m = scaled_count(value, sweep.n);
  spec.noise_scale = noise_scale;
  spec.seed = trial_seed(sweep.base_seed, point, static_cast<std::uint64_t>(trial));
  return spec;
}

SweepTable<IterationRow> iterations_experiment(const SweepSpec& sweep) {
  SweepTable<IterationRow> table;
  table.trials = run_trials(sweep, 0.0, StopRule::kRelativeError);
  const std::size_t points = sweep.grid.size();
  const auto trials = static_cast<std::size_t>(sweep.trials_per_point);
  for (std::size_t ai = 0; ai < sweep.algorithms.size(); ++ai) {
    for (std::size_t point = 0; point < points; ++point) {
      double total = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        const TrialRecord& rec = table.trials[(ai * points + point) * trials + t];
        const int cap = sweep.algorithms[ai] == Variant::kOMP
                            ? static_cast<int>(rec.spec.k)
                            : sweep.max_iter;
        total += rec.success ? rec.iterations_used : cap;
      }
      table.rows.push_back({sweep.algorithms[ai], sweep.axis, sweep.grid[point],
                            total / static_cast<double>(trials)});
    }
  }
  return table;
}

SweepTable<SuccessRow> success_experiment(const SweepSpec& sweep, double noise_scale) {
  SweepTable<SuccessRow> table;
  table.trials = run_trials(sweep, noise_scale, StopRule::kIterationCapOnly);
  const std::size_t points = sweep.grid.size();
  const auto trials = static_cast<std::size_t>(sweep.trials_per_point);
  for (std::size_t ai = 0; ai < sweep.algorithms.size(); ++ai) {
    for (std::size_t point = 0; point < points; ++point) {
      int successes = 0;
      for (std::size_t t = 0; t < trials; ++t)
        successes += table.trials[(ai * points + point) * trials + t].success ? 1 : 0;
      table.rows.push_back({sweep.algorithms[ai], sweep.axis, sweep.grid[point],
                            static_cast<int>(trials), successes,
                            static_cast<double>(successes) / static_cast<double>(trials)});
    }
  }
  return table;
}

std::vector<ResidualRow> residual_experiment(const ResidualStudy& study) {
  const RecoveryProblem problem = gen_problem(study.problem);
  const SpectralBounds sigma = spectral_extremes(problem.a);
  const double base_eps = sigma.sigma_max * sigma.sigma_max + 1.0;
  std::vector<ResidualRow> rows;
  for (const ParameterChoice& choice : study.parameters) {
    double eps = 0.0;
    switch (choice.eps_mode) {
      case ParameterChoice::Eps::kDefaultRule: eps = default_parameters(sigma, choice.lambda); break;
      case ParameterChoice::Eps::kExplicit: eps = choice.eps_value; break;
      case ParameterChoice::Eps::kScaledBase: eps = choice.eps_value * base_eps; break;
    }
    for (Variant v : study.algorithms) {
      SolverConfig c;
      c.variant = v;
      c.eps = eps;
      c.lambda = choice.lambda;
      c.max_outer_iter = study.max_iter;
      c.qp_tol = study.qp_tol;
      c.qp_max_iter = study.qp_max_iter;
      c.stop_rule = StopRule::kIterationCapOnly;
      const SolveResult result = solve(problem, c);
      for (const TraceRecord& rec : result.trace) rows.push_back({eps, choice.lambda, v, rec});
    }
  }
  return rows;
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, count); ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

CertifiedInstance gen_certified_instance(const CertifiedInstanceSpec& spec) {
  if (spec.m + 1 != spec.n)
    throw ConfigError("gen_certified_instance: construction needs m = n - 1");
  if (spec.theorem < 1 || spec.theorem > 3)
    throw ConfigError("gen_certified_instance: theorem must be 1, 2 or 3");
  Rng rng(spec.seed);
  const Index n = spec.n, m = spec.m, k = spec.k;
  for (int attempt = 1; attempt <= 1000; ++attempt) {
    // Nearly flat unit vector v; the rows of A span its orthogonal complement.
    Eigen::MatrixXd basis(n, n);
    for (Index i = 0; i < n; ++i) {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      basis(i, 0) = sign * (1.0 + 0.01 * rng.normal());
    }
    for (Index j = 1; j < n; ++j)
      for (Index i = 0; i < n; ++i) basis(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    const Eigen::MatrixXd q = qr.householderQ();
    // AᵀA = c²(I − vvᵀ): scaling c² = 2/(2 − 3/n) balances the RIC over
    // supports whose share of ‖v‖² is about 3/n.
    const double c = std::sqrt(2.0 / (2.0 - 3.0 / static_cast<double>(n)));
    RowMajorMatrix a = c * q.rightCols(m).transpose();
    for (Index i = 0; i < a.size(); ++i) a.data()[i] += 1e-3 * rng.normal();
    DenseMatrix matrix(std::move(a));

    const SpectralBounds sigma = spectral_extremes(matrix);
    const RipConstants deltas = compute_rip_constants(matrix, k, spec.theorem > 1);
    // Probe the ε-bound with a placeholder certificate, then place (ε, λ)
    // strictly inside the certified ranges.
    auto certify = [&](double eps, double lambda) {
      switch (spec.theorem) {
        case 1: return theorem1_certificate(deltas, sigma, eps, lambda);
        case 2: return theorem2_certificate(deltas, sigma, eps, lambda);
        default: return theorem3_certificate(deltas, sigma, eps, lambda);
      }
    };
    const TheoremCertificate probe = certify(1.0, 1.0);
    if (!probe.delta_ok || !std::isfinite(probe.eps_lower_bound)) {
      continue;
    }
    const double eps = probe.eps_lower_bound * (1.05 + 0.5 * rng.uniform()) + 1e-6;
    const TheoremCertificate range = certify(eps, 1.0);
    const double lambda =
        range.lambda_lower + (range.lambda_upper - range.lambda_lower) * (0.5 + 0.5 * rng.uniform());
    TheoremCertificate cert = certify(eps, std::min(lambda, range.lambda_upper));
    if (!cert.valid) continue;

    // k-sparse signal plus an optional tail and noise of size `perturbation`.
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
      const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    Vector x = Vector::Zero(n);
    for (Index i = 0; i < k; ++i) {
      const double z = rng.normal();
      x(perm[static_cast<std::size_t>(i)]) = (z < 0 ? -1.0 : 1.0) * (1.0 + std::abs(z));
    }
    Vector noise = Vector::Zero(m);
    if (spec.perturbation > 0.0) {
      for (Index i = k; i < n; ++i)
        x(perm[static_cast<std::size_t>(i)]) = spec.perturbation * rng.normal();
      for (Index i = 0; i < m; ++i) noise(i) = spec.perturbation * rng.normal();
    }

    CertifiedInstance out{RecoveryProblem{matrix, matrix.values() * x + noise, k, x,
                                          spec.perturbation > 0.0 ? std::optional<Vector>(noise)
                                                                  : std::nullopt},
                          cert, SolverConfig{}, attempt};
    out.config.variant = spec.theorem == 1   ? Variant::kNTOT
                         : spec.theorem == 2 ? Variant::kNTROT
                                             : Variant::kNTROTP;
    out.config.eps = cert.eps;
    out.config.lambda = cert.lambda;
    out.config.max_outer_iter = 15;
    out.config.stop_rule = StopRule::kIterationCapOnly;
    out.config.record_iterates = true;
    return out;
  }
  throw NumericalFailure("gen_certified_instance: no certified matrix within 1000 attempts");
}

}  // namespace ntot

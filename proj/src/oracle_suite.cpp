#include "ntot/oracle_suite.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ntot/capped_simplex_qp.hpp"
#include "ntot/errors.hpp"
#include "ntot/experiments.hpp"
#include "ntot/random.hpp"
#include "ntot/rip_analysis.hpp"

namespace ntot {

namespace {

constexpr std::size_t kMaxFailureNotes = 5;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Vector gaussian(Rng& rng, Index n, double scale = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

DenseMatrix gaussian_matrix(Rng& rng, Index m, Index n) {
  RowMajorMatrix a(m, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = scale * rng.normal();
  return DenseMatrix(std::move(a));
}

// Rows: orthonormal basis of the complement of a random direction, plus
// Gaussian jitter. RICs of low orders stay well below 1.
DenseMatrix near_isometric_matrix(Rng& rng, Index n, double jitter) {
  Eigen::MatrixXd basis(n, n);
  for (Index i = 0; i < basis.size(); ++i) basis.data()[i] = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(basis).householderQ();
  RowMajorMatrix a = q.rightCols(n - 1).transpose();
  for (Index i = 0; i < a.size(); ++i) a.data()[i] += jitter * rng.normal();
  return DenseMatrix(std::move(a));
}

std::vector<Index> random_subset(Rng& rng, Index n, Index size) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < size; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  perm.resize(static_cast<std::size_t>(size));
  return perm;
}

Vector sparse_vector(Rng& rng, Index n, const std::vector<Index>& support) {
  Vector x = Vector::Zero(n);
  for (Index i : support) {
    const double z = rng.normal();
    x(i) = (z < 0 ? -1.0 : 1.0) * (0.5 + std::abs(z));
  }
  return x;
}

std::uint64_t suite_seed(std::uint64_t seed, std::uint64_t suite, std::uint64_t case_index) {
  return trial_seed(seed, suite, case_index);
}

std::string describe(std::string_view what, std::uint64_t index) {
  std::ostringstream s;
  s << what << " #" << index;
  return s.str();
}

// Brute-force projection: refined grid search over the first n-1
// coordinates, the last one fixed by the equality constraint.
Vector grid_projection(const Vector& v, Index k) {
  const Index n = v.size();
  Vector best = Vector::Constant(n, static_cast<double>(k) / static_cast<double>(n));
  double best_dist = (v - best).squaredNorm();
  Vector center = best;
  double step = 0.02;
  double half_width = 0.5;
  for (int level = 0; level < 3; ++level) {
    Vector w(n);
    const auto steps = static_cast<int>(std::lround(2 * half_width / step));
    std::function<void(Index, double)> visit = [&](Index i, double sum) {
      if (i == n - 1) {
        w(i) = static_cast<double>(k) - sum;
        if (w(i) < 0.0 || w(i) > 1.0) return;
        const double dist = (v - w).squaredNorm();
        if (dist < best_dist) {
          best_dist = dist;
          best = w;
        }
        return;
      }
      for (int s = 0; s <= steps; ++s) {
        const double value = center(i) - half_width + s * step;
        if (value < 0.0 || value > 1.0) continue;
        w(i) = value;
        visit(i + 1, sum + value);
      }
    };
    if (level == 0) center = Vector::Constant(n, 0.5);
    visit(0, 0.0);
    center = best;
    half_width = 2 * step;
    step /= 10;
  }
  return best;
}

}  // namespace

void SuiteResult::expect(bool ok, const std::string& what) {
  ++checks;
  if (ok) return;
  ++failures;
  if (failures <= kMaxFailureNotes) notes.push_back("FAILED: " + what);
}

SupportSet top_k_highest_index(const Vector& x, Index k) {
  std::vector<Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double fa = std::abs(x(a)), fb = std::abs(x(b));
    return fa != fb ? fa > fb : a > b;
  });
  order.resize(static_cast<std::size_t>(std::min(k, x.size())));
  return SupportSet(order, x.size());
}

SuiteResult p1_relaxation_suite(std::uint64_t seed, int instances) {
  Stopwatch clock;
  SuiteResult r;
  r.name = "p1";
  int agreements = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  QPOptions options;
  options.tol = 1e-10;
  options.max_iter = 20000;
  for (int i = 0; i < instances; ++i) {
    Rng rng(suite_seed(seed, 1, static_cast<std::uint64_t>(i)));
    const Index n = 6 + static_cast<Index>(rng.below(7));
    const Index k = 1 + static_cast<Index>(rng.below(3));
    const Index m = n / 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n / 2)));
    const DenseMatrix a = gaussian_matrix(rng, m, n);
    const Vector x = sparse_vector(rng, n, random_subset(rng, n, k));
    const Vector u = x + gaussian(rng, n, 0.3);
    const Vector y = a.values() * x + gaussian(rng, m, 0.01);

    const OptimalThreshold binary = exact_optimal_threshold(a, u, y, k);
    const QPSolution relaxed = solve_relaxed_ot({a, u, y, k}, options);
    const double gap = relaxed.objective - binary.objective;
    worst_gap = std::max(worst_gap, gap);
    r.expect(gap <= 1e-8, describe("relaxed objective above binary optimum, instance", i));
    if (top_k_support(u.cwiseProduct(relaxed.w), k) == binary.support) ++agreements;
  }
  const double rate = instances > 0 ? static_cast<double>(agreements) / instances : 0.0;
  r.expect(rate >= 0.10, "rounded support agreement below 10%");
  std::ostringstream note;
  note << "instances=" << instances << " max(relaxed - binary)=" << worst_gap
       << " rounding agreement=" << rate;
  r.notes.insert(r.notes.begin(), note.str());
  r.seconds = clock.seconds();
  return r;
}

SuiteResult projection_suite(std::uint64_t seed, int pairs, int grid_instances) {
  Stopwatch clock;
  SuiteResult r;
  r.name = "projection";
  for (int i = 0; i < pairs; ++i) {
    Rng rng(suite_seed(seed, 2, static_cast<std::uint64_t>(i)));
    const Index n = 1 + static_cast<Index>(rng.below(30));
    const Index k = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    const Vector a = gaussian(rng, n, 2.0) + Vector::Constant(n, rng.normal());
    const Vector b = gaussian(rng, n, 2.0) + Vector::Constant(n, rng.normal());
    const Vector pa = project_capped_simplex(a, k);
    const Vector pb = project_capped_simplex(b, k);
    const bool feasible = pa.minCoeff() >= -1e-12 && pa.maxCoeff() <= 1.0 + 1e-12 &&
                          std::abs(pa.sum() - static_cast<double>(k)) <= 1e-12 * (n + 1);
    r.expect(feasible, describe("infeasible projection, pair", i));
    r.expect((project_capped_simplex(pa, k) - pa).lpNorm<Eigen::Infinity>() <= 1e-12,
             describe("projection not idempotent, pair", i));
    r.expect((pa - pb).norm() <= (a - b).norm() + 1e-12,
             describe("projection expands distance, pair", i));
  }
  double worst = 0.0;
  for (int i = 0; i < grid_instances; ++i) {
    Rng rng(suite_seed(seed, 3, static_cast<std::uint64_t>(i)));
    const Index n = 1 + static_cast<Index>(rng.below(4));
    const Index k = n == 1 ? 1 : 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - 1)));
    const Vector v = gaussian(rng, n, 1.5) + Vector::Constant(n, 0.5);
    const Vector p = project_capped_simplex(v, k);
    const Vector g = grid_projection(v, k);
    const double diff = (p - g).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, diff);
    r.expect(diff <= 2e-3, describe("grid search disagrees, instance", i));
    r.expect((v - p).squaredNorm() <= (v - g).squaredNorm() + 1e-12,
             describe("grid point closer than projection, instance", i));
  }
  std::ostringstream note;
  note << "pairs=" << pairs << " grid instances=" << grid_instances
       << " max grid deviation=" << worst;
  r.notes.insert(r.notes.begin(), note.str());
  r.seconds = clock.seconds();
  return r;
}

SuiteResult inequality_suite(std::uint64_t seed, int draws, int lemma2_instances) {
  Stopwatch clock;
  SuiteResult r;
  r.name = "inequalities";
  constexpr double kSlack = 1e-9;
  double tail_margin = std::numeric_limits<double>::infinity();
  double lemma1_margin = std::numeric_limits<double>::infinity();
  double lemma2_margin = std::numeric_limits<double>::infinity();

  for (int i = 0; i < draws; ++i) {
    Rng rng(suite_seed(seed, 4, static_cast<std::uint64_t>(i)));
    const Index m = 2 + static_cast<Index>(rng.below(6));
    const Index n = m + 1 + static_cast<Index>(rng.below(6));
    const DenseMatrix a = gaussian_matrix(rng, m, n);
    const SpectralBounds sigma = spectral_extremes(a);
    const double s1 = sigma.sigma_max * sigma.sigma_max;

    const double eps_tail = s1 * (1.0 + 2.0 * rng.uniform());
    const InequalityReport tail = tail_bound_check(a, eps_tail, gaussian(rng, m), sigma);
    r.expect(tail.applicable && tail.holds(kSlack), describe("tail bound, draw", i));
    tail_margin = std::min(tail_margin, tail.rhs - tail.lhs);

    const Index t = 1 + static_cast<Index>(rng.below(3));
    const double eps = s1 * (1.01 + 2.0 * rng.uniform());
    const double lambda =
        (eps + sigma.sigma_min * sigma.sigma_min) * (0.05 + 0.95 * rng.uniform());
    const std::vector<Index> block = random_subset(rng, n, t);
    const Index u_size = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(t)));
    const Index omega_size = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(t)));
    const Vector u = sparse_vector(
        rng, n, std::vector<Index>(block.begin(), block.begin() + u_size));
    const SupportSet omega(std::vector<Index>(block.end() - omega_size, block.end()), n);
    const InequalityReport lemma1 = lemma1_check(a, eps, lambda, u, omega, t);
    r.expect(lemma1.applicable && lemma1.holds(kSlack), describe("Lemma 1 bound, draw", i));
    lemma1_margin = std::min(lemma1_margin, lemma1.rhs - lemma1.lhs);
  }

  for (int i = 0; i < lemma2_instances; ++i) {
    Rng rng(suite_seed(seed, 5, static_cast<std::uint64_t>(i)));
    const Index n = 8 + static_cast<Index>(rng.below(3));
    const Index k = 1 + static_cast<Index>(rng.below(2));
    InequalityReport lemma2;
    lemma2.applicable = false;
    for (int attempt = 0; attempt < 100 && !lemma2.applicable; ++attempt) {
      const DenseMatrix a = near_isometric_matrix(rng, n, 0.05);
      const RipConstants deltas = compute_rip_constants(a, k, false);
      if (deltas.delta_2k >= 1.0) continue;
      const std::vector<Index> support = random_subset(rng, n, k);
      const Vector x = sparse_vector(rng, n, support);
      const Vector eta = gaussian(rng, n - 1, 0.01);
      const Vector u = x + gaussian(rng, n, 0.5);
      lemma2 = lemma2_check(a, x, eta, u, SupportSet(support, n), k, deltas);
    }
    r.expect(lemma2.applicable && lemma2.holds(kSlack), describe("Lemma 2 bound, instance", i));
    if (lemma2.applicable) lemma2_margin = std::min(lemma2_margin, lemma2.rhs - lemma2.lhs);
  }

  std::ostringstream note;
  note << "draws=" << draws << " lemma2 instances=" << lemma2_instances
       << " min margins: tail=" << tail_margin << " lemma1=" << lemma1_margin
       << " lemma2=" << lemma2_margin;
  r.notes.insert(r.notes.begin(), note.str());
  r.seconds = clock.seconds();
  return r;
}

SuiteResult contraction_suite(std::uint64_t seed, int instances_per_theorem,
                              std::vector<CertifiedRun>* runs) {
  Stopwatch clock;
  SuiteResult r;
  r.name = "contraction";
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t pairs = 0;
  const int noisy = instances_per_theorem / 2;
  for (int theorem = 1; theorem <= 3; ++theorem) {
    for (int i = 0; i < instances_per_theorem + noisy; ++i) {
      CertifiedInstanceSpec spec;
      spec.theorem = theorem;
      spec.perturbation = i < instances_per_theorem ? 0.0 : 1e-3;
      spec.seed = suite_seed(seed, 10 + static_cast<std::uint64_t>(theorem),
                             static_cast<std::uint64_t>(i));
      const std::string label =
          "theorem " + std::to_string(theorem) + (spec.perturbation > 0 ? " noisy" : "") +
          " instance #" + std::to_string(i);
      CertifiedInstance inst = gen_certified_instance(spec);
      const SolveResult result = solve(inst.problem, inst.config);
      r.expect(result.status != SolveStatus::kNumericalFailure, label + ": numerical failure");
      const ContractionReport step = replay_contraction(result, inst.problem, inst.certificate);
      r.expect(step.violations == 0, label + ": contraction violated");
      worst = std::max(worst, step.max_violation);
      pairs += step.pairs_checked;
      if (spec.perturbation == 0.0) {
        const ContractionReport decay =
            replay_geometric_decay(result, *inst.problem.x_true, inst.certificate.rho);
        r.expect(decay.violations == 0, label + ": geometric decay violated");
      }
      r.expect(count_nonzeros(result.x_hat) <= inst.problem.k, label + ": output not k-sparse");
      if (runs) runs->push_back({inst.problem, inst.config, result});
    }
  }
  std::ostringstream note;
  note << "instances=" << 3 * (instances_per_theorem + noisy) << " replayed steps=" << pairs
       << " max(lhs - rhs)=" << worst;
  r.notes.insert(r.notes.begin(), note.str());
  r.seconds = clock.seconds();
  return r;
}

SuiteResult thresholding_suite(std::uint64_t seed, const TopKRule& rule) {
  Stopwatch clock;
  SuiteResult r;
  r.name = "thresholding";
  const double levels[] = {-2.0, -1.0, 0.0, 1.0, 2.0};
  for (int i = 0; i < 200; ++i) {
    Rng rng(suite_seed(seed, 6, static_cast<std::uint64_t>(i)));
    const Index n = 2 + static_cast<Index>(rng.below(10));
    const Index k = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n + 1)));
    Vector x(n);
    for (Index j = 0; j < n; ++j) x(j) = levels[rng.below(5)];
    // Expected selection: magnitude descending, then index ascending.
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(x(a)) > std::abs(x(b)); });
    order.resize(static_cast<std::size_t>(k));
    const SupportSet expected(order, n);
    r.expect(rule(x, k) == expected, describe("L_k tie rule, vector", i));
  }
  // Exact ties in Z_k^#: integer data keeps every objective exact.
  for (int i = 0; i < 100; ++i) {
    Rng rng(suite_seed(seed, 7, static_cast<std::uint64_t>(i)));
    const Index n = 4 + static_cast<Index>(rng.below(5));
    const Index m = 2 + static_cast<Index>(rng.below(3));
    const Index k = 1 + static_cast<Index>(rng.below(2));
    RowMajorMatrix a(m, n);
    for (Index j = 0; j < a.size(); ++j) a.data()[j] = static_cast<double>(rng.below(3)) - 1.0;
    Vector u(n), y(m);
    for (Index j = 0; j < n; ++j) u(j) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (Index j = 0; j < m; ++j) y(j) = static_cast<double>(rng.below(5)) - 2.0;
    const DenseMatrix matrix(a);
    double best = std::numeric_limits<double>::infinity();
    std::vector<Index> best_support;
    // Bitmask enumeration; keep the lexicographically smallest minimizer.
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) != k) continue;
      std::vector<Index> s;
      for (Index j = 0; j < n; ++j)
        if (mask & (1u << j)) s.push_back(j);
      Vector r_vec = y;
      for (Index j : s) r_vec -= u(j) * a.col(j);
      const double obj = r_vec.squaredNorm();
      if (obj < best || (obj == best && s < best_support)) {
        best = obj;
        best_support = s;
      }
    }
    const OptimalThreshold got = exact_optimal_threshold(matrix, u, y, k);
    r.expect(got.support == SupportSet(best_support, n) && got.objective == best,
             describe("Z_k^# tie rule, instance", i));
  }
  r.seconds = clock.seconds();
  return r;
}

std::size_t pursuit_and_sparsity_violations(const SolveResult& result, Variant variant, Index k,
                                            double slack) {
  std::size_t violations = 0;
  const bool pursuit = variant == Variant::kNTROTP || variant == Variant::kNSHTP;
  for (const TraceRecord& rec : result.trace) {
    if (pursuit && rec.iteration > 0) {
      if (!rec.pre_pursuit_residual) {
        ++violations;
      } else if (rec.residual > *rec.pre_pursuit_residual + slack * std::max(1.0, *rec.pre_pursuit_residual)) {
        ++violations;
      }
    }
    if (rec.iterate && count_nonzeros(*rec.iterate) > k) ++violations;
  }
  if (count_nonzeros(result.x_hat) > k) ++violations;
  return violations;
}

bool run_oracle_suites(const std::vector<std::string>& names, std::uint64_t seed,
                       bool inject_tie_fault, std::ostream& out) {
  std::vector<std::string> selected;
  for (const std::string& name : names) {
    if (name == "all") {
      selected.assign(std::begin(kSuiteNames), std::end(kSuiteNames));
      break;
    }
    if (std::find(std::begin(kSuiteNames), std::end(kSuiteNames), name) == std::end(kSuiteNames))
      throw ConfigError("unknown oracle suite '" + name + "'");
    selected.push_back(name);
  }
  if (selected.empty()) selected.assign(std::begin(kSuiteNames), std::end(kSuiteNames));

  std::size_t passed = 0;
  for (const std::string& name : selected) {
    SuiteResult r;
    if (name == "p1") r = p1_relaxation_suite(seed);
    else if (name == "projection") r = projection_suite(seed);
    else if (name == "inequalities") r = inequality_suite(seed);
    else if (name == "contraction") r = contraction_suite(seed);
    else r = thresholding_suite(seed, inject_tie_fault ? TopKRule(top_k_highest_index)
                                                        : TopKRule(top_k_support));
    out << (r.passed() ? "PASS " : "FAIL ") << r.name << ": " << r.checks - r.failures << "/"
        << r.checks << " checks passed (" << r.seconds << " s)\n";
    for (const std::string& note : r.notes) out << "  " << note << "\n";
    if (r.passed()) ++passed;
  }
  out << "suites passed: " << passed << "/" << selected.size() << "\n";
  return passed == selected.size();
}

}  // namespace ntot

#include "ntot/capped_simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace ntot {

namespace {

struct Breakpoint {
  double at;
  bool saturates;  // false: entry leaves 0 (τ = v_i), true: reaches 1 (τ = v_i − 1)
  Index index;
};

// Products with B = A diag(u) and its transpose.
struct ScaledOperator {
  const DenseMatrix& a;
  const Vector& u;

  Vector apply(const Vector& w) const { return a.values() * u.cwiseProduct(w); }
  Vector apply_transpose(const Vector& r) const {
    return u.cwiseProduct(a.values().transpose() * r);
  }
};

constexpr int kPowerSteps = 100;
constexpr double kLipschitzInflation = 1.01;

double estimate_sigma_max_squared(const ScaledOperator& b, Index n) {
  Vector v(n);
  std::uint64_t state = 0x243f6a8885a308d3ULL;
  for (Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    v(i) = 0.5 + static_cast<double>(state >> 11) * 0x1.0p-53;
  }
  v.normalize();
  double estimate = 0.0;
  for (int step = 0; step < kPowerSteps; ++step) {
    Vector bv = b.apply(v);
    estimate = bv.squaredNorm();
    Vector next = b.apply_transpose(bv);
    const double norm = next.norm();
    if (norm == 0.0 || !std::isfinite(norm)) break;
    v = next / norm;
  }
  return estimate;
}

}  // namespace

Vector project_capped_simplex(const Vector& v, Index k) {
  const Index n = v.size();
  if (k < 1 || k > n)
    throw std::invalid_argument("project_capped_simplex: requires 1 <= k <= n");
  require_finite(v, "project_capped_simplex");

  std::vector<Breakpoint> events;
  events.reserve(static_cast<std::size_t>(2 * n));
  for (Index i = 0; i < n; ++i) {
    events.push_back({v(i), false, i});
    events.push_back({v(i) - 1.0, true, i});
  }
  std::sort(events.begin(), events.end(), [](const Breakpoint& a, const Breakpoint& b) {
    if (a.at != b.at) return a.at > b.at;
    if (a.saturates != b.saturates) return !a.saturates;
    return a.index < b.index;
  });

  // s(τ) = Σ clamp(v_i − τ, 0, 1) is continuous, piecewise linear and
  // nonincreasing; between breakpoints it equals
  //   saturated + free_sum − free_count·τ.
  // Sweep τ downwards until s reaches k.
  const auto target = static_cast<double>(k);
  double saturated = 0.0;
  double free_sum = 0.0;
  Index free_count = 0;
  double tau = events.back().at;
  for (const Breakpoint& e : events) {
    const double s = saturated + free_sum - static_cast<double>(free_count) * e.at;
    if (s >= target) {
      tau = free_count > 0
                ? (saturated + free_sum - target) / static_cast<double>(free_count)
                : e.at;
      break;
    }
    if (e.saturates) {
      --free_count;
      free_sum -= v(e.index);
      saturated += 1.0;
    } else {
      ++free_count;
      free_sum += v(e.index);
    }
  }

  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = std::clamp(v(i) - tau, 0.0, 1.0);
  return w;
}

QPSolution solve_relaxed_ot(const RelaxedOTProblem& problem,
                            const QPOptions& options,
                            const std::optional<Vector>& warm_start) {
  const DenseMatrix& a = problem.a;
  const Index n = a.cols();
  const Index k = problem.k;
  if (problem.u.size() != n) throw DimensionMismatch("solve_relaxed_ot: u.len != A.cols");
  if (problem.y.size() != a.rows()) throw DimensionMismatch("solve_relaxed_ot: y.len != A.rows");
  if (k < 1 || k > n) throw std::invalid_argument("solve_relaxed_ot: requires 1 <= k <= n");
  if (!(options.tol > 0.0)) throw ConfigError("solve_relaxed_ot: tol must be positive");
  if (warm_start && warm_start->size() != n)
    throw DimensionMismatch("solve_relaxed_ot: warm start length != n");

  const Vector& y = problem.y;
  const ScaledOperator b{a, problem.u};
  auto objective_at = [&](const Vector& w) { return (y - b.apply(w)).squaredNorm(); };

  QPSolution out;
  out.w = warm_start ? project_capped_simplex(*warm_start, k)
                     : Vector::Constant(n, static_cast<double>(k) / static_cast<double>(n));

  const double sigma2 = estimate_sigma_max_squared(b, n);
  if (!std::isfinite(sigma2))
    throw NumericalFailure("solve_relaxed_ot: cannot estimate the Lipschitz constant");
  if (sigma2 == 0.0) {
    // B = 0: every feasible w is optimal.
    out.objective = objective_at(out.w);
    out.converged = true;
    if (options.record_history) out.objective_history.push_back(out.objective);
    return out;
  }
  double lipschitz = 2.0 * kLipschitzInflation * sigma2;

  Vector w = out.w;
  Vector bw = b.apply(w);
  Vector grad = 2.0 * b.apply_transpose(bw - y);
  double f = (bw - y).squaredNorm();
  Vector w_prev = w, bw_prev = bw, grad_prev = grad;
  double t = 1.0;
  if (options.record_history) out.objective_history.push_back(f);

  auto stationarity = [&](const Vector& point, const Vector& g) {
    return (point - project_capped_simplex(point - g / lipschitz, k)).norm();
  };

  int it = 0;
  double kkt = stationarity(w, grad);
  for (; it < options.max_iter; ++it) {
    if (kkt <= options.tol) {
      out.converged = true;
      break;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    // Extrapolated point; B z and ∇f(z) follow by linearity.
    const Vector z = w + beta * (w - w_prev);
    const Vector bz = bw + beta * (bw - bw_prev);
    const Vector gz = grad + beta * (grad - grad_prev);
    const double fz = (bz - y).squaredNorm();

    Vector w_new, bw_new;
    double f_new = 0.0;
    for (;;) {
      w_new = project_capped_simplex(z - gz / lipschitz, k);
      bw_new = b.apply(w_new);
      f_new = (bw_new - y).squaredNorm();
      const Vector step = w_new - z;
      const double model = fz + gz.dot(step) + 0.5 * lipschitz * step.squaredNorm();
      if (f_new <= model + 1e-12 * std::max(1.0, fz)) break;
      lipschitz *= 2.0;
      if (!std::isfinite(lipschitz))
        throw NumericalFailure("solve_relaxed_ot: step size collapsed");
    }

    if (f_new > f) {
      if (beta == 0.0) break;  // rounding-level stall at a plain step
      // Restart: drop momentum, next pass is a plain projected-gradient step.
      t = 1.0;
      w_prev = w;
      bw_prev = bw;
      grad_prev = grad;
      continue;
    }

    w_prev = std::move(w);
    bw_prev = std::move(bw);
    grad_prev = std::move(grad);
    w = std::move(w_new);
    bw = std::move(bw_new);
    grad = 2.0 * b.apply_transpose(bw - y);
    f = f_new;
    t = t_next;
    if (options.record_history) out.objective_history.push_back(f);
    kkt = stationarity(w, grad);
  }

  out.w = std::move(w);
  out.iterations = it;
  out.kkt_residual = kkt;
  out.objective = objective_at(out.w);
  if (!std::isfinite(out.objective))
    throw NumericalFailure("solve_relaxed_ot: non-finite objective");
  return out;
}

}  // namespace ntot

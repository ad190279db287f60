#include "ntot/rip_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ntot/matrix_io.hpp"

namespace ntot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quantities shared by the three certificates. `threshold` is the reciprocal
// of the amplification constant in front of (δ + σ₁² − λσ₁²/(ε+σ₁²)); the
// λ-interval is nonempty exactly when δ < threshold, and ε must exceed
// ((σ₁² − σ_min²)/(threshold − δ) − 1)σ₁².
void fill_ranges(TheoremCertificate& cert, double delta, double threshold) {
  const double s1 = cert.sigma.sigma_max * cert.sigma.sigma_max;
  const double sm = cert.sigma.sigma_min * cert.sigma.sigma_min;
  const double gap = threshold - delta;
  cert.eps_lower_bound = gap > 0.0 ? std::max(s1, ((s1 - sm) / gap - 1.0) * s1) : kInf;
  cert.lambda_lower = s1 > 0.0 && std::isfinite(threshold)
                          ? (cert.eps + s1) + (delta - threshold) * (cert.eps + s1) / s1
                          : kInf;
  cert.lambda_upper = cert.eps + sm;
  cert.eps_ok = cert.eps > cert.eps_lower_bound;
  cert.lambda_ok = cert.lambda_lower < cert.lambda && cert.lambda <= cert.lambda_upper;
}

// δ + σ₁² − λσ₁²/(ε + σ₁²)
double operator_factor(const TheoremCertificate& cert, double delta) {
  const double s1 = cert.sigma.sigma_max * cert.sigma.sigma_max;
  return delta + s1 - cert.lambda * s1 / (cert.eps + s1);
}

TheoremCertificate base_certificate(int id, const RipConstants& d, const SpectralBounds& s,
                                    double eps, double lambda) {
  TheoremCertificate cert;
  cert.theorem_id = id;
  cert.deltas = d;
  cert.sigma = s;
  cert.eps = eps;
  cert.lambda = lambda;
  return cert;
}

void finish(TheoremCertificate& cert) {
  if (!std::isfinite(cert.rho)) cert.rho = kInf;
  if (!std::isfinite(cert.tau)) cert.tau = kInf;
  cert.valid = cert.delta_ok && cert.eps_ok && cert.lambda_ok && cert.rho < 1.0;
}

double require_delta_3k(const RipConstants& d) {
  if (!d.delta_3k) throw ConfigError("certificate: delta_3k required");
  return *d.delta_3k;
}

}  // namespace

RICResult exact_ric(const DenseMatrix& a, Index q) {
  const Index n = a.cols();
  if (q < 0) throw std::invalid_argument("exact_ric: negative order");
  const Index order = std::min(q, n);
  RICResult result;
  result.order = q;
  result.witness_support = SupportSet({}, n);
  if (order == 0) return result;
  const auto count = binomial_capped(static_cast<std::size_t>(n),
                                     static_cast<std::size_t>(order), kRicGuard);
  if (count > kRicGuard) {
    std::ostringstream msg;
    msg << "exact_ric: C(" << n << ", " << order << ") exceeds the enumeration guard of "
        << kRicGuard;
    throw GuardViolation(msg.str());
  }

  const Eigen::MatrixXd gram = a.values().transpose() * a.values();
  std::vector<Index> current(static_cast<std::size_t>(order));
  for (Index i = 0; i < order; ++i) current[static_cast<std::size_t>(i)] = i;
  Eigen::MatrixXd block(order, order);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  double best = -1.0;
  std::vector<Index> witness;
  for (;;) {
    for (Index i = 0; i < order; ++i)
      for (Index j = 0; j < order; ++j)
        block(i, j) = gram(current[static_cast<std::size_t>(i)],
                           current[static_cast<std::size_t>(j)]);
    double lo = 0.0, hi = 0.0;
    if (order == 1) {
      lo = hi = block(0, 0);
    } else {
      eig.compute(block, Eigen::EigenvaluesOnly);
      lo = eig.eigenvalues()(0);
      hi = eig.eigenvalues()(order - 1);
    }
    const double dev = std::max(hi - 1.0, 1.0 - lo);
    ++result.supports_enumerated;
    if (dev > best) {
      best = dev;
      witness = current;
    }
    // Next combination in lexicographic order.
    Index pos = order - 1;
    while (pos >= 0 && current[static_cast<std::size_t>(pos)] == n - order + pos) --pos;
    if (pos < 0) break;
    ++current[static_cast<std::size_t>(pos)];
    for (Index i = pos + 1; i < order; ++i)
      current[static_cast<std::size_t>(i)] = current[static_cast<std::size_t>(i - 1)] + 1;
  }
  result.delta = std::max(best, 0.0);
  result.witness_support = SupportSet(std::move(witness), n);
  return result;
}

RipConstants compute_rip_constants(const DenseMatrix& a, Index k, bool with_3k) {
  RipConstants d;
  d.delta_k = exact_ric(a, k).delta;
  d.delta_2k = exact_ric(a, 2 * k).delta;
  if (with_3k) d.delta_3k = exact_ric(a, 3 * k).delta;
  return d;
}

TheoremCertificate theorem1_certificate(const RipConstants& d, const SpectralBounds& s,
                                        double eps, double lambda) {
  TheoremCertificate cert = base_certificate(1, d, s, eps, lambda);
  const double dk = d.delta_k, d2k = d.delta_2k;
  cert.delta_ok = d2k < kTheorem1Delta2kBound;
  const double ratio = (1.0 - d2k) / (1.0 + dk);
  const double threshold = ratio >= 0.0 ? std::sqrt(ratio) : -kInf;
  fill_ranges(cert, d2k, threshold);
  const double s1 = s.sigma_max * s.sigma_max;
  if (d2k < 1.0) {
    cert.rho = std::sqrt((1.0 + dk) / (1.0 - d2k)) * operator_factor(cert, d2k);
    // σ₁ (not σ₁²) multiplies λ here; the bound on the noise term carries
    // the operator norm σ₁/(ε + σ₁²).
    cert.tau = (lambda * s.sigma_max * std::sqrt(1.0 + dk) / (eps + s1) + 2.0) /
               std::sqrt(1.0 - d2k);
  } else {
    cert.rho = cert.tau = kInf;
  }
  finish(cert);
  return cert;
}

TheoremCertificate theorem2_certificate(const RipConstants& d, const SpectralBounds& s,
                                        double eps, double lambda) {
  TheoremCertificate cert = base_certificate(2, d, s, eps, lambda);
  const double dk = d.delta_k, d2k = d.delta_2k, d3k = require_delta_3k(d);
  cert.delta_ok = d3k < kTheorem2Delta3kBound;
  const double s1 = s.sigma_max * s.sigma_max;
  if (d3k < 1.0 && d2k < 1.0) {
    const double amplification = 3.0 * std::sqrt((1.0 + d3k) / (1.0 - d3k)) + 1.0;
    fill_ranges(cert, d3k, 1.0 / amplification);
    const double step = lambda * s1 / (eps + s1);
    cert.rho = std::sqrt((1.0 + dk) / (1.0 - d2k)) * (d2k + 2.0 * d3k + 3.0 * s1 - 3.0 * step) +
               operator_factor(cert, d3k);
    const double noise_gain = lambda * s.sigma_max / (eps + s1);
    cert.tau = (3.0 * noise_gain * std::sqrt(1.0 + dk) + 2.0) / std::sqrt(1.0 - d2k) +
               noise_gain;
  } else {
    fill_ranges(cert, d3k, -kInf);
    cert.rho = cert.tau = kInf;
  }
  finish(cert);
  return cert;
}

TheoremCertificate theorem3_certificate(const RipConstants& d, const SpectralBounds& s,
                                        double eps, double lambda) {
  TheoremCertificate cert = base_certificate(3, d, s, eps, lambda);
  const double dk = d.delta_k, d2k = d.delta_2k, d3k = require_delta_3k(d);
  cert.delta_ok = d3k < kTheorem3Delta3kBound;
  const double s1 = s.sigma_max * s.sigma_max;
  if (d3k < 1.0 && d2k < 1.0) {
    const double amplification = 3.0 / (1.0 - d3k) + 1.0 / std::sqrt(1.0 - d3k * d3k);
    fill_ranges(cert, d3k, 1.0 / amplification);
    cert.rho = amplification * operator_factor(cert, d3k);
    const double noise_gain = lambda * s.sigma_max / (eps + s1);
    cert.tau = std::sqrt(1.0 + dk) / (1.0 - d2k) +
               (3.0 * noise_gain * std::sqrt(1.0 + dk) + 2.0) /
                   ((1.0 - d2k) * std::sqrt(1.0 + d2k)) +
               noise_gain / std::sqrt(1.0 - d2k * d2k);
  } else {
    fill_ranges(cert, d3k, -kInf);
    cert.rho = cert.tau = kInf;
  }
  finish(cert);
  return cert;
}

TheoremCertificate theorem1_certificate(const DenseMatrix& a, Index k, double eps,
                                        double lambda) {
  return theorem1_certificate(compute_rip_constants(a, k, false), spectral_extremes(a), eps,
                              lambda);
}

TheoremCertificate theorem2_certificate(const DenseMatrix& a, Index k, double eps,
                                        double lambda) {
  return theorem2_certificate(compute_rip_constants(a, k, true), spectral_extremes(a), eps,
                              lambda);
}

TheoremCertificate theorem3_certificate(const DenseMatrix& a, Index k, double eps,
                                        double lambda) {
  return theorem3_certificate(compute_rip_constants(a, k, true), spectral_extremes(a), eps,
                              lambda);
}

void write_certificate(std::ostream& out, const TheoremCertificate& cert) {
  auto flag = [](bool b) { return b ? "true" : "false"; };
  const char* condition = cert.theorem_id == 1   ? "delta_2k < 0.5349"
                          : cert.theorem_id == 2 ? "delta_3k < 0.2119"
                                                 : "delta_3k < 0.2";
  out << "theorem=" << cert.theorem_id << '\n'
      << "delta_k=" << format_double(cert.deltas.delta_k) << '\n'
      << "delta_2k=" << format_double(cert.deltas.delta_2k) << '\n';
  if (cert.deltas.delta_3k) out << "delta_3k=" << format_double(*cert.deltas.delta_3k) << '\n';
  out << "sigma_max=" << format_double(cert.sigma.sigma_max) << '\n'
      << "sigma_min=" << format_double(cert.sigma.sigma_min) << '\n'
      << "eps=" << format_double(cert.eps) << '\n'
      << "lambda=" << format_double(cert.lambda) << '\n'
      << "eps_lower_bound=" << format_double(cert.eps_lower_bound) << '\n'
      << "lambda_interval=(" << format_double(cert.lambda_lower) << ", "
      << format_double(cert.lambda_upper) << "]\n"
      << "rho=" << format_double(cert.rho) << '\n'
      << "tau=" << format_double(cert.tau) << '\n'
      << "delta_condition=" << condition << '\n'
      << "delta_ok=" << flag(cert.delta_ok) << '\n'
      << "eps_ok=" << flag(cert.eps_ok) << '\n'
      << "lambda_ok=" << flag(cert.lambda_ok) << '\n'
      << "valid=" << flag(cert.valid) << '\n'
      << "verdict=" << (cert.valid ? "valid" : "invalid") << " (" << condition << ": "
      << flag(cert.delta_ok) << ")\n";
}

double default_parameters(const SpectralBounds& s, double lambda) {
  const double s1 = s.sigma_max * s.sigma_max;
  const double sm = s.sigma_min * s.sigma_min;
  return std::max(s1 + 1.0, lambda - sm);
}

double default_parameters(const DenseMatrix& a, double lambda) {
  return default_parameters(spectral_extremes(a), lambda);
}

ContractionReport replay_contraction(const SolveResult& result, const RecoveryProblem& problem,
                                     const TheoremCertificate& cert, double slack) {
  if (!problem.x_true) throw ConfigError("replay_contraction: ground truth required");
  if (!cert.valid) throw ConfigError("replay_contraction: certificate is not valid");
  const Vector& x = *problem.x_true;
  const Vector x_s = top_k_support(x, problem.k).restrict(x);
  ContractionReport report;
  report.effective_noise = (problem.y - problem.a.values() * x_s).norm();
  for (std::size_t p = 0; p + 1 < result.trace.size(); ++p) {
    const auto& cur = result.trace[p].iterate;
    const auto& next = result.trace[p + 1].iterate;
    if (!cur || !next) throw ConfigError("replay_contraction: trace lacks iterates");
    const double lhs = (*next - x_s).norm();
    const double rhs = cert.rho * (*cur - x_s).norm() + cert.tau * report.effective_noise;
    report.max_violation = std::max(report.max_violation, lhs - rhs);
    if (lhs > rhs + slack) ++report.violations;
    ++report.pairs_checked;
  }
  return report;
}

ContractionReport replay_geometric_decay(const SolveResult& result, const Vector& x_true,
                                         double rho, double slack) {
  ContractionReport report;
  if (result.trace.empty()) return report;
  const auto& first = result.trace.front().iterate;
  if (!first) throw ConfigError("replay_geometric_decay: trace lacks iterates");
  const double e0 = (*first - x_true).norm();
  for (const TraceRecord& rec : result.trace) {
    if (!rec.iterate) throw ConfigError("replay_geometric_decay: trace lacks iterates");
    const double lhs = (*rec.iterate - x_true).norm();
    const double rhs = std::pow(rho, rec.iteration) * e0;
    report.max_violation = std::max(report.max_violation, lhs - rhs);
    if (lhs > rhs + slack) ++report.violations;
    ++report.pairs_checked;
  }
  return report;
}

InequalityReport lemma1_check(const DenseMatrix& a, double eps, double lambda,
                              const Vector& u, const SupportSet& omega, Index t,
                              double delta_t, const SpectralBounds& sigma) {
  InequalityReport report;
  const double s1 = sigma.sigma_max * sigma.sigma_max;
  const double sm = sigma.sigma_min * sigma.sigma_min;
  const auto joint = omega.united(SupportSet::of(u)).size();
  report.applicable = eps > s1 && lambda <= eps + sm && static_cast<Index>(joint) <= t;
  if (!report.applicable) return report;
  // (AᵀA + εI)⁻¹AᵀA u = (AᵀA + εI)⁻¹Aᵀ(Au)
  const Vector v = u - lambda * newton_direction(a, eps, a.values() * u);
  report.lhs = omega.restrict(v).norm();
  report.rhs = (delta_t + s1 - lambda * s1 / (eps + s1)) * u.norm();
  return report;
}

InequalityReport lemma1_check(const DenseMatrix& a, double eps, double lambda,
                              const Vector& u, const SupportSet& omega, Index t) {
  return lemma1_check(a, eps, lambda, u, omega, t, exact_ric(a, t).delta,
                      spectral_extremes(a));
}

InequalityReport tail_bound_check(const DenseMatrix& a, double eps, const Vector& u,
                                  const SpectralBounds& sigma) {
  InequalityReport report;
  const double s1 = sigma.sigma_max * sigma.sigma_max;
  report.applicable = eps >= s1 && eps > 0.0;
  if (!report.applicable) return report;
  report.lhs = newton_direction(a, eps, u).norm();
  report.rhs = sigma.sigma_max / (eps + s1) * u.norm();
  return report;
}

InequalityReport lemma2_check(const DenseMatrix& a, const Vector& x_hat, const Vector& eta,
                              const Vector& u, const SupportSet& w_hat, Index k,
                              const RipConstants& deltas) {
  InequalityReport report;
  const SupportSet x_support = SupportSet::of(x_hat);
  const bool covers = std::all_of(x_support.indices().begin(), x_support.indices().end(),
                                  [&](Index i) { return w_hat.contains(i); });
  report.applicable = deltas.delta_2k < 1.0 && covers &&
                      static_cast<Index>(w_hat.size()) == k &&
                      static_cast<Index>(x_support.size()) <= k;
  if (!report.applicable) return report;
  const Vector y = a.values() * x_hat + eta;
  const OptimalThreshold best = exact_optimal_threshold(a, u, y, k);
  report.lhs = (u.cwiseProduct(best.w) - x_hat).norm();
  report.rhs = std::sqrt((1.0 + deltas.delta_k) / (1.0 - deltas.delta_2k)) *
                   w_hat.restrict(x_hat - u).norm() +
               2.0 / std::sqrt(1.0 - deltas.delta_2k) * eta.norm();
  return report;
}

}  // namespace ntot

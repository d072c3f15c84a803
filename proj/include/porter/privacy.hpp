#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "porter/rng.hpp"

namespace porter {

/// Perturbation standard deviation for (epsilon, delta)-LDP after T
/// iterations with per-sample clipping at tau and local sample size m:
/// sigma_p^2 = T * tau^2 * ln(1/delta) / (m^2 * epsilon^2).
inline double compute_sigma_p(double T, double tau, double m, double epsilon,
                              double delta) {
  if (!(T > 0.0 && tau > 0.0 && m > 0.0 && epsilon > 0.0))
    throw std::invalid_argument("compute_sigma_p: arguments must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("compute_sigma_p: delta must be in (0, 1)");
  return std::sqrt(T * tau * tau * std::log(1.0 / delta) /
                   (m * m * epsilon * epsilon));
}

/// Baseline utility of a centralized (epsilon, delta)-DP run with m samples:
/// phi_m = sqrt(d * ln(1/delta)) / (m * epsilon). Natural logarithm.
inline double compute_phi_m(double d, double m, double epsilon, double delta) {
  if (!(d > 0.0 && m > 0.0 && epsilon > 0.0))
    throw std::invalid_argument("compute_phi_m: arguments must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("compute_phi_m: delta must be in (0, 1)");
  return std::sqrt(d * std::log(1.0 / delta)) / (m * epsilon);
}

/// Full LDP budget with derived quantities. sigma_p and phi_m are pinned to
/// their formulas at construction and re-checked on deserialization; the
/// analysis assumes phi_m < 1, so phi_m_warning flags budgets outside that
/// regime.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  std::int64_t m = 0;
  std::int64_t T = 0;
  double tau = 0.0;
  std::int64_t d = 0;
  double sigma_p = 0.0;
  double phi_m = 0.0;

  bool phi_m_warning() const { return phi_m >= 1.0; }

  static PrivacyBudget make(double epsilon, double delta, std::int64_t m,
                            std::int64_t T, double tau, std::int64_t d) {
    if (m < 1 || T < 1 || d < 1)
      throw std::invalid_argument("privacy budget: m, T, d must be >= 1");
    PrivacyBudget b;
    b.epsilon = epsilon;
    b.delta = delta;
    b.m = m;
    b.T = T;
    b.tau = tau;
    b.d = d;
    b.sigma_p = compute_sigma_p(static_cast<double>(T), tau,
                                static_cast<double>(m), epsilon, delta);
    b.phi_m = compute_phi_m(static_cast<double>(d), static_cast<double>(m),
                            epsilon, delta);
    return b;
  }

  /// Re-derive sigma_p and phi_m and compare at 1e-12 relative. Used after
  /// reading a budget back from a config or metadata file.
  void recheck() const {
    const double sp = compute_sigma_p(static_cast<double>(T), tau,
                                      static_cast<double>(m), epsilon, delta);
    const double pm = compute_phi_m(static_cast<double>(d),
                                    static_cast<double>(m), epsilon, delta);
    if (std::abs(sp - sigma_p) > 1e-12 * std::max(std::abs(sp), 1e-300) ||
        std::abs(pm - phi_m) > 1e-12 * std::max(std::abs(pm), 1e-300))
      throw std::runtime_error("privacy budget: derived fields inconsistent");
  }
};

/// Advisory feasibility report for the moments-accountant certificate. It
/// never aborts a run.
///
/// Checks, with q = 1/m:
///   (a) epsilon <= T/m^2 (boundary inclusive),
///   (b) q <= tau/(16*sigma_p),
///   (c) existence of an integer lambda in [1, 1e6] with
///         (T*q*tau*lambda/sigma_p)^2 <= lambda*epsilon/2,
///         exp(-lambda*epsilon/2)     <= delta,
///         lambda <= (sigma_p^2/tau^2) * ln(tau/(q*sigma_p)).
///
/// Note (c) never holds when sigma_p comes from the Theorem-1 formula: the
/// first two inequalities then force lambda <= ln(1/delta)/(2*epsilon*T) and
/// lambda >= 2*ln(1/delta)/epsilon at once, which is empty for every T >= 1.
/// The search is still run verbatim and reports "no certificate found"; a
/// certificate is attainable for larger, caller-supplied sigma_p.
struct FeasibilityReport {
  bool epsilon_vs_iterations_ok = false;  // (a)
  bool sampling_ratio_ok = false;         // (b)
  std::optional<std::int64_t> certificate_lambda;  // (c), first satisfying
  bool batch_size_warning = false;  // set by callers running Option I with b > 1
  bool uniform_sampling_note = true;  // mini-batches are uniform, not Poisson

  bool certificate_found() const { return certificate_lambda.has_value(); }

  std::string to_text() const {
    std::ostringstream out;
    out << "feasibility.epsilon_le_T_over_m2 = "
        << (epsilon_vs_iterations_ok ? "pass" : "fail") << "\n";
    out << "feasibility.q_le_tau_over_16sigma = "
        << (sampling_ratio_ok ? "pass" : "fail") << "\n";
    if (certificate_lambda)
      out << "feasibility.certificate_lambda = " << *certificate_lambda << "\n";
    else
      out << "feasibility.certificate_lambda = no certificate found\n";
    if (batch_size_warning)
      out << "feasibility.warning = sigma_p formula assumes b = 1\n";
    out << "feasibility.note = sampling is uniform without replacement, not "
           "Poisson\n";
    return out.str();
  }
};

inline FeasibilityReport check_privacy_feasibility(double epsilon, double delta,
                                                   std::int64_t m, std::int64_t T,
                                                   double tau, double sigma_p,
                                                   std::int64_t lambda_cap = 1000000) {
  FeasibilityReport report;
  const double q = 1.0 / static_cast<double>(m);
  report.epsilon_vs_iterations_ok =
      epsilon <= static_cast<double>(T) / (static_cast<double>(m) * static_cast<double>(m));
  report.sampling_ratio_ok = q <= tau / (16.0 * sigma_p);

  const double moment_cap =
      (sigma_p * sigma_p / (tau * tau)) * std::log(tau / (q * sigma_p));
  for (std::int64_t lambda = 1; lambda <= lambda_cap; ++lambda) {
    const double lam = static_cast<double>(lambda);
    const double ratio = static_cast<double>(T) * q * tau * lam / sigma_p;
    if (ratio * ratio > lam * epsilon / 2.0) break;  // grows in lambda
    if (std::exp(-lam * epsilon / 2.0) > delta) continue;
    if (lam > moment_cap) break;
    report.certificate_lambda = lambda;
    break;
  }
  return report;
}

inline FeasibilityReport check_privacy_feasibility(const PrivacyBudget& budget) {
  return check_privacy_feasibility(budget.epsilon, budget.delta, budget.m,
                                   budget.T, budget.tau, budget.sigma_p);
}

/// Add i.i.d. N(0, sigma_p^2) noise per entry, one stream per agent column.
/// sigma_p = 0 returns the input bit-for-bit.
inline Eigen::MatrixXd gaussian_perturb(const Eigen::MatrixXd& M, double sigma_p,
                                        std::uint64_t master_seed,
                                        std::uint64_t iteration) {
  if (sigma_p < 0.0)
    throw std::invalid_argument("gaussian_perturb: sigma_p must be >= 0");
  if (sigma_p == 0.0) return M;
  Eigen::MatrixXd out(M.rows(), M.cols());
  for (Eigen::Index i = 0; i < M.cols(); ++i) {
    auto stream = rng::make_stream(master_seed, rng::Purpose::Noise,
                                   static_cast<std::uint64_t>(i), iteration);
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      out(r, i) = M(r, i) + sigma_p * stream.normal();
  }
  return out;
}

}  // namespace porter

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "porter/engine.hpp"

namespace porter {

enum class Schedule { Thm2, Thm3, Thm4 };

inline Schedule parse_schedule(const std::string& name) {
  if (name == "thm2") return Schedule::Thm2;
  if (name == "thm3") return Schedule::Thm3;
  if (name == "thm4") return Schedule::Thm4;
  throw std::invalid_argument("unknown schedule: " + name);
}

/// Inputs the schedules draw from. sigma_g (local gradient variance) and nu
/// (target gradient norm) are caller-supplied estimates; the analysis treats
/// them as known constants.
struct ScheduleInputs {
  double rho = 1.0;     // compression ratio
  double alpha = 0.0;   // mixing rate
  double L = 1.0;       // smoothness estimate
  double phi_m = 0.0;   // baseline utility (thm2/thm3)
  std::int64_t T = 0;   // iteration count (thm4)
  double tau = 1.0;     // clip threshold (thm2 keeps the configured value)
  std::int64_t d = 1;   // problem dimension (for sigma_p)
  double sigma_g = 0.0; // local variance estimate (thm3/thm4)
  double nu = 0.0;      // target gradient norm (thm4)
};

/// Hyper-parameters plus any violated proof-side constraints. Violations are
/// reported, not fatal: the prescribed constants can break the working
/// assumptions for poorly connected or heavily compressed configurations.
struct ScheduleResult {
  HyperParams hp;
  std::vector<std::string> violated_constraints;
};

namespace detail {

/// gamma^2 <= rho^2/(96(1-rho)) and eta*L <= (1-alpha_hat)^{4/3}/8 with
/// alpha_hat = 1 + gamma*(alpha - 1). rho = 1 leaves gamma unconstrained.
inline void check_proof_constraints(const ScheduleInputs& in, const HyperParams& hp,
                                    std::vector<std::string>& violations) {
  if (in.rho < 1.0) {
    const double bound = in.rho * in.rho / (96.0 * (1.0 - in.rho));
    if (hp.gamma * hp.gamma > bound)
      violations.push_back("gamma^2 <= rho^2/(96(1-rho)) violated: " +
                           std::to_string(hp.gamma * hp.gamma) + " > " +
                           std::to_string(bound));
  }
  const double one_minus_alpha_hat = hp.gamma * (1.0 - in.alpha);
  const double eta_bound = std::pow(one_minus_alpha_hat, 4.0 / 3.0) / 8.0;
  if (hp.eta * in.L > eta_bound)
    violations.push_back("eta*L <= (1-alpha_hat)^{4/3}/8 violated: " +
                         std::to_string(hp.eta * in.L) + " > " +
                         std::to_string(eta_bound));
}

inline std::int64_t iterations_from_phi(double phi_m) {
  if (!(phi_m > 0.0 && phi_m < 1.0))
    throw std::invalid_argument("schedule: phi_m must be in (0, 1)");
  return static_cast<std::int64_t>(std::ceil(1.0 / (phi_m * phi_m)));
}

}  // namespace detail

/// Prescribed hyper-parameters of the three convergence theorems.
///
/// thm2 (DP, bounded gradients):  gamma = (1-alpha)rho/100,
///   eta = gamma^{4/3}(1-alpha)^{4/3} phi_m/(32L), T = phi_m^{-2}, b = 1,
///   sigma_p^2 = T tau^2 phi_m^2/d.
/// thm3 (DP, unbounded):          same gamma,
///   eta = gamma^{8/3}(1-alpha)^{8/3}/(8288L),
///   tau = max(365 rho^{-4/3}(1-alpha)^{-8/3} phi_m^{1/2}, 24 sigma_g),
///   b = 1, T = phi_m^{-2}, sigma_p^2 = T tau^2 phi_m^2/d.
/// thm4 (GC):                     same gamma, eta = sqrt(8/2072)/L,
///   tau = rho^{-2/3}(1-alpha)^{-4/3} T^{-1/2}, b = ceil((24 sigma_g/nu)^2),
///   sigma_p = 0.
inline ScheduleResult theoretical_hyperparams(Schedule which,
                                              const ScheduleInputs& in) {
  if (!(in.rho > 0.0 && in.rho <= 1.0))
    throw std::invalid_argument("schedule: rho must be in (0, 1]");
  if (!(in.alpha >= 0.0 && in.alpha < 1.0))
    throw std::invalid_argument("schedule: alpha must be in [0, 1)");
  if (!(in.L > 0.0)) throw std::invalid_argument("schedule: L must be > 0");

  ScheduleResult result;
  HyperParams& hp = result.hp;
  hp.gamma = (1.0 - in.alpha) * in.rho / 100.0;
  const double one_minus_alpha = 1.0 - in.alpha;

  switch (which) {
    case Schedule::Thm2: {
      hp.T = detail::iterations_from_phi(in.phi_m);
      hp.eta = std::pow(hp.gamma, 4.0 / 3.0) * std::pow(one_minus_alpha, 4.0 / 3.0) *
               in.phi_m / (32.0 * in.L);
      hp.b = 1;
      if (!(in.tau > 0.0))
        throw std::invalid_argument("schedule: thm2 needs the configured tau");
      hp.tau = in.tau;
      hp.sigma_p = std::sqrt(static_cast<double>(hp.T) * hp.tau * hp.tau *
                             in.phi_m * in.phi_m / static_cast<double>(in.d));
      break;
    }
    case Schedule::Thm3: {
      hp.T = detail::iterations_from_phi(in.phi_m);
      hp.eta = std::pow(hp.gamma, 8.0 / 3.0) * std::pow(one_minus_alpha, 8.0 / 3.0) /
               (8288.0 * in.L);
      hp.b = 1;
      if (!(in.sigma_g >= 0.0))
        throw std::invalid_argument("schedule: thm3 needs sigma_g >= 0");
      hp.tau = std::max(365.0 * std::pow(in.rho, -4.0 / 3.0) *
                            std::pow(one_minus_alpha, -8.0 / 3.0) *
                            std::sqrt(in.phi_m),
                        24.0 * in.sigma_g);
      hp.sigma_p = std::sqrt(static_cast<double>(hp.T) * hp.tau * hp.tau *
                             in.phi_m * in.phi_m / static_cast<double>(in.d));
      break;
    }
    case Schedule::Thm4: {
      if (in.T < 1) throw std::invalid_argument("schedule: thm4 needs T >= 1");
      if (!(in.nu > 0.0)) throw std::invalid_argument("schedule: thm4 needs nu > 0");
      if (!(in.sigma_g >= 0.0))
        throw std::invalid_argument("schedule: thm4 needs sigma_g >= 0");
      hp.T = in.T;
      hp.eta = std::sqrt(8.0 / 2072.0) / in.L;
      hp.tau = std::pow(in.rho, -2.0 / 3.0) * std::pow(one_minus_alpha, -4.0 / 3.0) /
               std::sqrt(static_cast<double>(in.T));
      const double ratio = 24.0 * in.sigma_g / in.nu;
      hp.b = std::max(1, static_cast<int>(std::ceil(ratio * ratio)));
      hp.sigma_p = 0.0;
      break;
    }
  }
  detail::check_proof_constraints(in, hp, result.violated_constraints);
  return result;
}

}  // namespace porter

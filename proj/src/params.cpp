#include "sparsevr/params.hpp"

#include <cmath>
#include <stdexcept>

namespace sparsevr {

SolverParams derive_params_serial(std::int64_t n, double kappa, double L,
                                  double omega,
                                  std::optional<std::int64_t> m_override) {
  return derive_params_async(n, kappa, L, omega, /*delta=*/1.0,
                             /*tau_tilde=*/0.0, m_override);
}

SolverParams derive_params_async(std::int64_t n, double kappa, double L,
                                 double omega, double delta, double tau_tilde,
                                 std::optional<std::int64_t> m_override) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (kappa < 1.0) throw std::invalid_argument("kappa must be >= 1");
  if (L <= 0.0) throw std::invalid_argument("L must be > 0");
  if (omega <= 1.0) throw std::invalid_argument("omega must be > 1");
  if (delta <= 0.0 || delta > 1.0)
    throw std::invalid_argument("delta must be in (0, 1]");
  if (tau_tilde < 0.0) throw std::invalid_argument("tau_tilde must be >= 0");

  SolverParams p;
  p.m = m_override.value_or(2 * n);
  if (p.m < 1) throw std::invalid_argument("m must be >= 1");
  p.omega = omega;
  p.tau_tilde = tau_tilde;
  p.L = L;
  p.kappa = kappa;
  p.mu = L / kappa;

  const double a = 1.0 + 2.0 * std::sqrt(delta) * tau_tilde;
  const double sqrt_m = std::sqrt(static_cast<double>(p.m));
  p.theta = sqrt_m / (std::sqrt(kappa * a) + sqrt_m);
  p.phi = (1.0 - p.theta) / L;
  p.eta = (1.0 - p.theta) / (L * p.theta * a);
  p.S = static_cast<std::int64_t>(
      std::ceil(2.0 * omega * std::sqrt(kappa * a / static_cast<double>(p.m))));
  if (p.S < 1) p.S = 1;
  return p;
}

std::int64_t restarts_for_accuracy(double initial_gap, double eps,
                                   double omega) {
  if (eps <= 0.0 || initial_gap <= 0.0 || omega <= 1.0)
    throw std::invalid_argument("need initial_gap, eps > 0 and omega > 1");
  if (initial_gap <= eps) return 0;
  return static_cast<std::int64_t>(
      std::ceil(std::log(initial_gap / eps) / std::log(omega)));
}

}  // namespace sparsevr

#pragma once

#include <cstdint>
#include <optional>

namespace sparsevr {

// The scalars of the accelerated schedules. theta couples the z and snapshot
// sequences, phi scales the variance-correction term, eta is the mirror step,
// S the epochs per restart. The serial schedule keeps phi == eta * theta.
struct SolverParams {
  std::int64_t m = 0;       // epoch length
  double omega = 50.0;      // restart-frequency constant (> 1)
  double theta = 0.0;       // coupling weight, in (0,1)
  double phi = 0.0;         // correction coefficient, units of 1/L
  double eta = 0.0;         // step size
  std::int64_t S = 1;       // epochs per restart
  std::int64_t R = 0;       // restart budget; 0 = run until the pass budget
  double tau_tilde = 0.0;   // overlap estimate (async schedule only)
  double L = 0.0;
  double mu = 0.0;
  double kappa = 0.0;
  std::uint64_t seed = 0;
};

// theta = sqrt(m) / (sqrt(kappa) + sqrt(m)), phi = (1-theta)/L,
// eta = (1-theta)/(L theta), S = ceil(2 omega sqrt(kappa/m)), m defaults 2n.
SolverParams derive_params_serial(std::int64_t n, double kappa, double L,
                                  double omega,
                                  std::optional<std::int64_t> m_override = {});

// Same with kappa inflated by A = 1 + 2 sqrt(delta) tau~ and the step divided
// by A; tau~ = 0 reproduces the serial schedule exactly.
SolverParams derive_params_async(std::int64_t n, double kappa, double L,
                                 double omega, double delta, double tau_tilde,
                                 std::optional<std::int64_t> m_override = {});

// R = ceil(log(initial_gap/eps) / log(omega)); exposed as a helper only,
// budgets drive the restart count in practice.
std::int64_t restarts_for_accuracy(double initial_gap, double eps,
                                   double omega);

}  // namespace sparsevr

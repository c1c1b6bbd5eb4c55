#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsevr/objective.hpp"
#include "sparsevr/params.hpp"

namespace sparsevr {

// Deterministic single-threaded emulation of tau-bounded asynchrony: the
// virtual iterates z_k, the inconsistent reads z^_k assembled from masked
// pending updates, and the perturbed couplings y^_k.

enum class MaskPolicy {
  none,         // z^_k = z_k: the serial algorithm
  all_missing,  // every pending update is fully missing from the read
  bernoulli,    // each pending coordinate is missing independently w.p. q
};

struct MaskEntry {
  std::int64_t j;                     // index of the pending update
  std::vector<std::int32_t> coords;   // masked coordinates, subset of supp(G_j)
};

struct ScheduleStep {
  std::int64_t sample = 0;
  std::vector<MaskEntry> masks;
  std::vector<double> z;     // virtual iterate before update k
  std::vector<double> zhat;  // perturbed read
  std::vector<double> yhat;  // perturbed coupling
  SparseGradient update;     // G at yhat
};

struct ScheduleTrace {
  std::int64_t tau = 0;
  MaskPolicy policy = MaskPolicy::none;
  bool tau_clamped = false;
  std::vector<double> x_tilde;
  std::vector<double> z0;
  std::vector<double> z_final;
  std::vector<ScheduleStep> steps;
};

struct HarnessConfig {
  std::int64_t tau = 0;
  MaskPolicy policy = MaskPolicy::all_missing;
  double bernoulli_q = 0.5;
  std::uint64_t seed = 0;
};

// Runs one epoch of params.m iterations in iteration order, constructing
// z^_k = z_k + eta * sum_{j=(k-tau)+}^{k-1} J_j^k G_j with masks drawn by the
// policy, then the exact virtual recursion z_{k+1} = z_k - eta G_k.
// tau > m is clamped to m (flagged in the trace).
ScheduleTrace simulate_epoch(const Problem& p, const SolverParams& params,
                             const HarnessConfig& cfg,
                             std::span<const double> x_tilde,
                             std::span<const double> z0);

struct CheckReport {
  std::string check;
  std::int64_t trials = 0;
  double max_margin = 0.0;  // positive means the inequality was violated
  bool violated = false;
  std::int64_t worst_k = -1;
};

std::string to_json_string(const CheckReport& report);

// Monte-Carlo check of the overlap inequality
//   E <G_k, z^_k - z_k> <= (sqrt(delta) eta / 2)
//                          (sum_{j=(k-tau)+}^{k-1} E||G_j||^2 + tau E||G_k||^2)
// for every k, with 3-standard-error slack. Requires trials >= 100.
CheckReport check_overlap_bound(const Problem& p, const SolverParams& params,
                                const HarnessConfig& cfg, std::int64_t trials);

// Exact-enumeration check of the variance bound
//   E_i ||G_y - grad f(y)||^2 <= 2L B(x~, y) - ||grad f(y)||^2
//                                + 2 <grad f(y), D g~> - <g~, D g~>
// at `trials` random (y, x~) pairs, plus the projection-idempotence
// identities behind it. L is the safe per-sample constant.
CheckReport check_variance_bound(const Problem& p, std::int64_t trials,
                                 std::uint64_t seed);

// Exact average over i of the dense-embedded estimator vs grad f(y),
// tolerance 1e-12 per coordinate, at `points` random (y, x~) pairs.
CheckReport check_unbiasedness(const Problem& p, std::int64_t points,
                               std::uint64_t seed);

// One-iteration coupling inequality of the serial schedule at random
// iterates, with exact expectation over i:
//   f(y) - f* <= (1-theta)(f(x~) - f*)
//                + (L theta^2 / (2(1-theta))) (||z-x*||^2 - E||z'-x*||^2) + 1e-8
CheckReport check_coupling_inequality(const Problem& p, std::int64_t trials,
                                      std::uint64_t seed,
                                      std::span<const double> x_star,
                                      double fstar);

}  // namespace sparsevr

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sparsevr/objective.hpp"
#include "sparsevr/params.hpp"
#include "sparsevr/trace.hpp"

namespace sparsevr {

// Raised when suboptimality exceeds divergence_factor times its initial
// value; fail fast on bad configurations.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunBudget {
  double max_passes = std::numeric_limits<double>::infinity();
  // Stop once f(snapshot) - fstar <= target_subopt. -inf disables.
  double target_subopt = -std::numeric_limits<double>::infinity();
  std::int64_t max_restarts = std::numeric_limits<std::int64_t>::max();
};

// Invoked after every appended trace row; return false to stop the run.
using EpochCallback = std::function<bool(const TraceRecord&)>;

enum class SnapshotMode {
  random_iterate,  // x~_{s+1} = y_t for a pre-drawn uniform t
  averaged,        // x~_{s+1} = mean of the epoch's y sequence
};

struct SolveOptions {
  RunBudget budget;
  double fstar = 0.0;
  SnapshotMode snapshot = SnapshotMode::random_iterate;
  std::vector<double> x0;  // empty = zeros
  EpochCallback on_epoch;
  double divergence_factor = 1e6;
};

struct SolverStats {
  std::int64_t epochs = 0;
  std::int64_t restarts_completed = 0;
  // Async engines only:
  double tau_estimate = 0.0;
  std::int64_t updates_applied = 0;
  std::int64_t counter_fetches = 0;
};

struct UpdateLogEntry {
  std::int32_t coord;
  double delta;
};

// One ASAGA memory-table write: the stored scalar must equal l'_i at the
// margin that was read.
struct SagaAuditEntry {
  std::int64_t sample;
  double margin;
  double lprime;
};

struct SolverResult {
  std::vector<double> x;
  Trace trace;
  // f(x_r) - fstar at every restart point, starting with x_0.
  std::vector<double> restart_gaps;
  SolverStats stats;
  // State of the z sequence after the last completed epoch (SVRG-family
  // engines); lets tests replay the update multiset.
  std::vector<double> final_z;
  std::vector<UpdateLogEntry> update_log;   // async engines, when requested
  std::vector<SagaAuditEntry> saga_audit;   // ASAGA, when requested
};

// Serial sparse accelerated SVRG with restarts. Per iteration, on T_i only:
//   y   = theta z + (1-theta) x~ - phi D grad f(x~)
//   z  -= eta (grad f_i(y) - grad f_i(x~) + D_i grad f(x~))
// The epoch snapshot is y_t for pre-drawn uniform t (densified via the
// coupling at iteration t), the restart point is the average of the epoch
// snapshots, and z carries over across epochs.
SolverResult ss_acc_svrg(const Problem& p, const SolverParams& params,
                         const SolveOptions& opt = {});

// Sparse SVRG: the same inner loop with theta = 1 and phi = 0.
// step <= 0 selects the 1/(4L) default.
SolverResult svrg_serial(const Problem& p, double step = 0.0,
                         std::optional<std::int64_t> m = {},
                         std::uint64_t seed = 0, const SolveOptions& opt = {});

// SAGA with a stored loss derivative per sample and the D-weighted sparse
// average-gradient correction. step <= 0 selects the 1/(3L) default.
SolverResult saga_serial(const Problem& p, double step = 0.0,
                         std::uint64_t seed = 0, const SolveOptions& opt = {});

// ---- Lagged-update baselines (dense-regularizer problems) ----
//
// Mathematically identical iterates to the eager dense algorithms, with
// per-coordinate last-seen counters and closed-form catch-up of the
// accumulated idle updates. The snapshot of the lagged accelerated SVRG is
// the epoch average of y (a random iterate would require reaching into
// previous epochs).

SolverResult lagged_ss_acc_svrg(const Problem& p, const SolverParams& params,
                                const SolveOptions& opt = {});

struct KatyushaParams {
  std::int64_t m = 0;
  double tau1 = 0.0;   // sqrt(m / (3 kappa)), clamped to 1/2
  double tau2 = 0.5;
  double alpha = 0.0;  // 1 / (3 tau1 L)
  double theta_weight = 1.0;  // snapshot weight base, 1 + min(alpha mu, 1/(4m))
  double L = 0.0;
  double mu = 0.0;
  std::uint64_t seed = 0;
};

KatyushaParams derive_katyusha_params(std::int64_t n, double kappa, double L,
                                      std::optional<std::int64_t> m_override = {},
                                      std::uint64_t seed = 0);

SolverResult lagged_katyusha(const Problem& p, const KatyushaParams& params,
                             const SolveOptions& opt = {});

}  // namespace sparsevr

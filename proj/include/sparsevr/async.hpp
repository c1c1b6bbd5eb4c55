#pragma once

#include <cstdint>
#include <optional>

#include "sparsevr/objective.hpp"
#include "sparsevr/params.hpp"
#include "sparsevr/shared_vector.hpp"
#include "sparsevr/solvers.hpp"

namespace sparsevr {

// Per-epoch shared state of the asynchronous engine. Snapshot fields are
// immutable between the epoch barriers; the counter and captured_y slot are
// written by the workers.
struct AsyncEpochState {
  SnapshotContext snap;
  std::atomic<std::int64_t> sample_counter{0};
  std::int64_t chosen_t = -1;
  std::vector<double> captured_y;
};

// Samples partitioned into contiguous per-worker chunks, per-worker dense
// accumulators reduced in worker-index order. workers == 1 is bit-identical
// to the serial full gradient.
std::vector<double> parallel_full_gradient(const Problem& p,
                                           std::span<const double> x,
                                           int workers);
SnapshotContext make_snapshot_parallel(const Problem& p,
                                       std::span<const double> x, int workers);

struct AsyncOptions {
  RunBudget budget;
  double fstar = 0.0;
  std::vector<double> x0;
  EpochCallback on_epoch;
  double divergence_factor = 1e6;
  bool log_updates = false;  // record (coord, delta) of every applied update
};

// Lock-free accelerated SVRG over a shared z with per-coordinate atomic
// writes. One thread reproduces ss_acc_svrg bit for bit.
SolverResult as_acc_svrg_async(const Problem& p, const SolverParams& params,
                               int workers, const AsyncOptions& opt = {});

// Asynchronous sparse SVRG: the same engine with theta = 1, phi = 0.
// step <= 0 selects 1/(2L).
SolverResult kromagnon_async(const Problem& p, double step, int workers,
                             const AsyncOptions& opt = {},
                             std::optional<std::int64_t> m = {},
                             std::uint64_t seed = 0);

// Asynchronous SAGA: atomic scalar swap per sample plus a shared average
// gradient with atomic per-coordinate adds. step <= 0 selects 1/(3L).
SolverResult asaga_async(const Problem& p, double step, int workers,
                         const AsyncOptions& opt = {}, std::uint64_t seed = 0);

}  // namespace sparsevr

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>

#include "sparsevr/async.hpp"
#include "sparsevr/rng.hpp"

namespace sparsevr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t max_row_nnz(const SparseDataset& ds) {
  std::size_t m = 0;
  for (std::int64_t i = 0; i < ds.n; ++i)
    m = std::max(m, static_cast<std::size_t>(ds.row_ptr[i + 1] - ds.row_ptr[i]));
  return m;
}

struct alignas(64) PaddedAtomic {
  std::atomic<std::int64_t> v{std::numeric_limits<std::int64_t>::max()};
};

void atomic_max(std::atomic<std::int64_t>& target, std::int64_t value) {
  std::int64_t cur = target.load(std::memory_order_relaxed);
  while (cur < value && !target.compare_exchange_weak(
                            cur, value, std::memory_order_relaxed,
                            std::memory_order_relaxed)) {
  }
}

struct WorkerErrors {
  std::mutex mu;
  std::exception_ptr first;

  void capture() {
    std::lock_guard<std::mutex> lock(mu);
    if (!first) first = std::current_exception();
  }
  void rethrow_if_any() {
    if (first) std::rethrow_exception(first);
  }
};

}  // namespace

std::vector<double> parallel_full_gradient(const Problem& p,
                                           std::span<const double> x,
                                           int workers) {
  return make_snapshot_parallel(p, x, workers).g_tilde;
}

SnapshotContext make_snapshot_parallel(const Problem& p,
                                       std::span<const double> x,
                                       int workers) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (static_cast<std::int64_t>(x.size()) != p.data.d)
    throw std::invalid_argument("dimension mismatch");
  const std::int64_t n = p.data.n;
  const auto d = static_cast<std::size_t>(p.data.d);

  SnapshotContext snap;
  snap.x_tilde.assign(x.begin(), x.end());
  snap.lprime.resize(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> acc(
      static_cast<std::size_t>(workers), std::vector<double>(d, 0.0));

  WorkerErrors errors;
  omp_set_dynamic(0);
#pragma omp parallel num_threads(workers)
  {
    const int w = omp_get_thread_num();
    try {
      const std::int64_t lo = n * w / workers;
      const std::int64_t hi = n * (w + 1) / workers;
      auto& a = acc[static_cast<std::size_t>(w)];
      for (std::int64_t i = lo; i < hi; ++i) {
        const auto row = p.data.row(i);
        double dot = 0.0;
        for (std::size_t t = 0; t < row.size(); ++t)
          dot += row.val[t] * x[static_cast<std::size_t>(row.idx[t])];
        const double lp =
            logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]);
        snap.lprime[static_cast<std::size_t>(i)] = lp;
        for (std::size_t t = 0; t < row.size(); ++t)
          a[static_cast<std::size_t>(row.idx[t])] += lp * row.val[t];
      }
    } catch (...) {
      errors.capture();
    }
  }
  errors.rethrow_if_any();

  // Deterministic reduction in worker-index order.
  snap.g_tilde.assign(d, 0.0);
  for (int w = 1; w < workers; ++w)
    for (std::size_t v = 0; v < d; ++v) acc[0][v] += acc[static_cast<std::size_t>(w)][v];
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t v = 0; v < d; ++v)
    snap.g_tilde[v] = acc[0][v] * inv_n + p.mu * x[v];

  snap.dg_tilde.resize(d);
  for (std::size_t v = 0; v < d; ++v)
    snap.dg_tilde[v] = p.reg == RegularizerMode::sparsified
                           ? p.profile.d_diag[v] * snap.g_tilde[v]
                           : snap.g_tilde[v];
  return snap;
}

namespace {

// Shared lock-free engine for AS-Acc-SVRG (general theta, phi) and
// KroMagnon (theta = 1, phi = 0).
SolverResult run_accel_async(const Problem& p, const SolverParams& prm,
                             int workers, const AsyncOptions& opt) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  const std::int64_t n = p.n();
  const std::int64_t d = p.dim();
  const std::int64_t m = prm.m;
  if (m < 1) throw std::invalid_argument("params.m must be >= 1");
  const double theta = prm.theta;
  const double omt = 1.0 - theta;
  const double phi = prm.phi;
  const double eta = prm.eta;
  const std::int64_t max_restarts =
      std::min(prm.R > 0 ? prm.R : std::numeric_limits<std::int64_t>::max(),
               opt.budget.max_restarts);

  std::vector<double> x_r(static_cast<std::size_t>(d), 0.0);
  if (!opt.x0.empty()) {
    if (static_cast<std::int64_t>(opt.x0.size()) != d)
      throw std::invalid_argument("x0 has wrong dimension");
    x_r = opt.x0;
  }

  const Clock::time_point t0 = Clock::now();
  const double initial_gap = loss_value(p, x_r) - opt.fstar;

  SolverResult res;
  res.trace.push_back({0, 0, 0.0, 0.0, initial_gap});
  res.restart_gaps.push_back(initial_gap);
  bool stop = initial_gap <= opt.budget.target_subopt;
  if (opt.on_epoch && !opt.on_epoch(res.trace.front())) stop = true;
  double passes = 0.0;

  SharedVector z(static_cast<std::size_t>(d));
  std::vector<double> x_tilde = x_r;
  std::vector<double> sum_snaps(static_cast<std::size_t>(d));
  AsyncEpochState st;
  st.captured_y.resize(static_cast<std::size_t>(d));
  const std::size_t row_cap = max_row_nnz(p.data);

  std::vector<PaddedAtomic> active(static_cast<std::size_t>(workers));
  std::atomic<std::int64_t> tau_max{0};
  std::atomic<std::int64_t> total_updates{0};
  std::vector<std::vector<UpdateLogEntry>> logs(
      static_cast<std::size_t>(opt.log_updates ? workers : 0));

  omp_set_dynamic(0);

  for (std::int64_t r = 0; !stop && r < max_restarts; ++r) {
    x_tilde = x_r;
    z.assign(x_r);
    sum_snaps.assign(sum_snaps.size(), 0.0);
    std::int64_t s = 0;
    for (; s < prm.S && !stop; ++s) {
      st.snap = make_snapshot_parallel(p, x_tilde, workers);
      st.chosen_t = static_cast<std::int64_t>(
          derive_stream(prm.seed, static_cast<std::uint64_t>(r),
                        static_cast<std::uint64_t>(s), kSnapshotStream)
              .next_below(static_cast<std::uint64_t>(m)));
      st.sample_counter.store(0, std::memory_order_relaxed);
      for (auto& a : active)
        a.v.store(std::numeric_limits<std::int64_t>::max(),
                  std::memory_order_relaxed);

      const auto* xt = st.snap.x_tilde.data();
      const auto* dg = st.snap.dg_tilde.data();
      WorkerErrors errors;

#pragma omp parallel num_threads(workers)
      {
        const int w = omp_get_thread_num();
        try {
          Rng rng = derive_stream(prm.seed, static_cast<std::uint64_t>(r),
                                  static_cast<std::uint64_t>(s),
                                  static_cast<std::uint64_t>(w));
          std::vector<double> zbuf(row_cap), ybuf(row_cap);
          std::vector<double> zfull;
          std::int64_t applied = 0;
          auto& slot = active[static_cast<std::size_t>(w)].v;
          while (true) {
            const std::int64_t k =
                st.sample_counter.fetch_add(1, std::memory_order_relaxed);
            if (k >= m) break;
            slot.store(k, std::memory_order_relaxed);
            const auto i = static_cast<std::int64_t>(
                rng.next_below(static_cast<std::uint64_t>(n)));
            const auto row = p.data.row(i);

            if (k == st.chosen_t) {
              // Snapshot capture: load every coordinate of z, densify y
              // through the coupling, then run the usual sparse step off the
              // same read.
              zfull.resize(static_cast<std::size_t>(d));
              z.read_all(zfull);
              for (std::int64_t v = 0; v < d; ++v)
                st.captured_y[static_cast<std::size_t>(v)] =
                    detail::couple_coord(zfull[static_cast<std::size_t>(v)],
                                         xt[v], dg[v], theta, omt, phi);
              for (std::size_t t = 0; t < row.size(); ++t)
                zbuf[t] = zfull[static_cast<std::size_t>(row.idx[t])];
            } else {
              inconsistent_read(z, row.idx, std::span(zbuf).first(row.size()));
            }

            double dot = 0.0;
            for (std::size_t t = 0; t < row.size(); ++t) {
              const auto v = static_cast<std::size_t>(row.idx[t]);
              const double y = detail::couple_coord(zbuf[t], xt[v], dg[v],
                                                    theta, omt, phi);
              ybuf[t] = y;
              dot += row.val[t] * y;
            }
            const double lp_diff =
                logistic_deriv(dot,
                               p.data.labels[static_cast<std::size_t>(i)]) -
                st.snap.lprime[static_cast<std::size_t>(i)];
            for (std::size_t t = 0; t < row.size(); ++t) {
              const auto v = static_cast<std::size_t>(row.idx[t]);
              const double g = detail::estimator_coord(
                  lp_diff, row.val[t], p.mu_d[v], ybuf[t], xt[v], dg[v]);
              const double delta = -eta * g;
              z.add(v, delta);
              if (opt.log_updates)
                logs[static_cast<std::size_t>(w)].push_back(
                    {row.idx[t], delta});
            }
            ++applied;

            if ((k & 255) == 0 && workers > 1) {
              std::int64_t oldest = k;
              for (const auto& a : active) {
                const std::int64_t o = a.v.load(std::memory_order_relaxed);
                if (o < oldest) oldest = o;
              }
              atomic_max(tau_max, k - oldest);
            }
          }
          slot.store(std::numeric_limits<std::int64_t>::max(),
                     std::memory_order_relaxed);
          total_updates.fetch_add(applied, std::memory_order_relaxed);
        } catch (...) {
          errors.capture();
        }
      }
      errors.rethrow_if_any();
      res.stats.counter_fetches +=
          st.sample_counter.load(std::memory_order_relaxed);

      x_tilde = st.captured_y;
      for (std::size_t v = 0; v < sum_snaps.size(); ++v)
        sum_snaps[v] += x_tilde[v];

      passes += static_cast<double>(n + 2 * m) / static_cast<double>(n);
      ++res.stats.epochs;
      const double sub = loss_value(p, x_tilde) - opt.fstar;
      res.trace.push_back({r, s + 1, passes, seconds_since(t0), sub});
      if (!(sub <= opt.divergence_factor * std::max(initial_gap, 1e-12)))
        throw DivergenceError("asynchronous run diverged");
      if (sub <= opt.budget.target_subopt) stop = true;
      if (passes >= opt.budget.max_passes) stop = true;
      if (opt.on_epoch && !opt.on_epoch(res.trace.back())) stop = true;
    }

    if (s == prm.S) {
      for (std::size_t v = 0; v < sum_snaps.size(); ++v)
        x_r[v] = sum_snaps[v] / static_cast<double>(s);
      ++res.stats.restarts_completed;
      res.restart_gaps.push_back(loss_value(p, x_r) - opt.fstar);
    }
  }

  res.x = x_tilde;
  res.final_z.resize(static_cast<std::size_t>(d));
  z.read_all(res.final_z);
  res.stats.tau_estimate =
      static_cast<double>(tau_max.load(std::memory_order_relaxed));
  res.stats.updates_applied = total_updates.load(std::memory_order_relaxed);
  for (auto& l : logs)
    res.update_log.insert(res.update_log.end(), l.begin(), l.end());
  return res;
}

}  // namespace

SolverResult as_acc_svrg_async(const Problem& p, const SolverParams& params,
                               int workers, const AsyncOptions& opt) {
  return run_accel_async(p, params, workers, opt);
}

SolverResult kromagnon_async(const Problem& p, double step, int workers,
                             const AsyncOptions& opt,
                             std::optional<std::int64_t> m,
                             std::uint64_t seed) {
  SolverParams prm;
  prm.m = m.value_or(2 * p.n());
  prm.theta = 1.0;
  prm.phi = 0.0;
  prm.eta = step > 0.0 ? step : 1.0 / (2.0 * p.L);
  prm.S = std::numeric_limits<std::int64_t>::max();
  prm.L = p.L;
  prm.mu = p.mu;
  prm.kappa = p.kappa();
  prm.seed = seed;
  return run_accel_async(p, prm, workers, opt);
}

SolverResult asaga_async(const Problem& p, double step, int workers,
                         const AsyncOptions& opt, std::uint64_t seed) {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  const std::int64_t n = p.n();
  const std::int64_t d = p.dim();
  const double gamma = step > 0.0 ? step : 1.0 / (3.0 * p.L);

  std::vector<double> x0(static_cast<std::size_t>(d), 0.0);
  if (!opt.x0.empty()) {
    if (static_cast<std::int64_t>(opt.x0.size()) != d)
      throw std::invalid_argument("x0 has wrong dimension");
    x0 = opt.x0;
  }
  const Clock::time_point t0 = Clock::now();
  const double initial_gap = loss_value(p, x0) - opt.fstar;

  SolverResult res;
  res.trace.push_back({0, 0, 0.0, 0.0, initial_gap});
  res.restart_gaps.push_back(initial_gap);
  bool stop = initial_gap <= opt.budget.target_subopt;
  if (opt.on_epoch && !opt.on_epoch(res.trace.front())) stop = true;
  double passes = 0.0;

  SharedVector x(static_cast<std::size_t>(d));
  x.assign(x0);
  SharedVector abar(static_cast<std::size_t>(d));
  std::vector<std::atomic<double>> alpha(static_cast<std::size_t>(n));

  // Deterministic single-threaded table fill, one effective pass.
  for (std::int64_t i = 0; i < n; ++i) {
    const auto row = p.data.row(i);
    double dot = 0.0;
    for (std::size_t t = 0; t < row.size(); ++t)
      dot += row.val[t] * x0[static_cast<std::size_t>(row.idx[t])];
    const double lp =
        logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]);
    alpha[static_cast<std::size_t>(i)].store(lp, std::memory_order_relaxed);
    for (std::size_t t = 0; t < row.size(); ++t) {
      const auto v = static_cast<std::size_t>(row.idx[t]);
      abar.store(v, abar.load(v) + lp * row.val[t] / static_cast<double>(n));
    }
  }
  passes += 1.0;

  const std::size_t row_cap = max_row_nnz(p.data);
  std::vector<double> xdense(static_cast<std::size_t>(d));
  std::vector<std::vector<SagaAuditEntry>> audit(
      static_cast<std::size_t>(opt.log_updates ? workers : 0));
  omp_set_dynamic(0);

  for (std::int64_t chunk = 0; !stop; ++chunk) {
    std::atomic<std::int64_t> counter{0};
    WorkerErrors errors;

#pragma omp parallel num_threads(workers)
    {
      const int w = omp_get_thread_num();
      try {
        Rng rng = derive_stream(seed, static_cast<std::uint64_t>(chunk),
                                static_cast<std::uint64_t>(w), kSagaStream);
        std::vector<double> xb(row_cap);
        while (true) {
          const std::int64_t k = counter.fetch_add(1, std::memory_order_relaxed);
          if (k >= n) break;
          const auto i = static_cast<std::int64_t>(
              rng.next_below(static_cast<std::uint64_t>(n)));
          const auto row = p.data.row(i);
          inconsistent_read(x, row.idx, std::span(xb).first(row.size()));
          double dot = 0.0;
          for (std::size_t t = 0; t < row.size(); ++t)
            dot += row.val[t] * xb[t];
          const double lp =
              logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]);
          if (opt.log_updates)
            audit[static_cast<std::size_t>(w)].push_back({i, dot, lp});
          const double diff =
              lp - alpha[static_cast<std::size_t>(i)].exchange(
                       lp, std::memory_order_relaxed);
          for (std::size_t t = 0; t < row.size(); ++t) {
            const auto v = static_cast<std::size_t>(row.idx[t]);
            const double dv = p.reg == RegularizerMode::sparsified
                                  ? p.profile.d_diag[v]
                                  : 1.0;
            const double u =
                diff * row.val[t] + dv * abar.load(v) + p.mu_d[v] * xb[t];
            x.add(v, -gamma * u);
            abar.add(v, diff * row.val[t] / static_cast<double>(n));
          }
        }
      } catch (...) {
        errors.capture();
      }
    }
    errors.rethrow_if_any();

    passes += 1.0;
    ++res.stats.epochs;
    x.read_all(xdense);
    const double sub = loss_value(p, xdense) - opt.fstar;
    res.trace.push_back({0, chunk + 1, passes, seconds_since(t0), sub});
    if (!(sub <= opt.divergence_factor * std::max(initial_gap, 1e-12)))
      throw DivergenceError("ASAGA diverged");
    if (sub <= opt.budget.target_subopt) stop = true;
    if (passes >= opt.budget.max_passes) stop = true;
    if (opt.on_epoch && !opt.on_epoch(res.trace.back())) stop = true;
  }

  x.read_all(xdense);
  res.x = xdense;
  for (auto& a : audit)
    res.saga_audit.insert(res.saga_audit.end(), a.begin(), a.end());
  return res;
}

}  // namespace sparsevr

#include <chrono>
#include <cmath>

#include "sparsevr/rng.hpp"
#include "sparsevr/solvers.hpp"

namespace sparsevr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> initial_point(const Problem& p, const SolveOptions& opt) {
  if (opt.x0.empty()) return std::vector<double>(p.dim(), 0.0);
  if (static_cast<std::int64_t>(opt.x0.size()) != p.dim())
    throw std::invalid_argument("x0 has wrong dimension");
  return opt.x0;
}

std::size_t max_row_nnz(const SparseDataset& ds) {
  std::size_t m = 0;
  for (std::int64_t i = 0; i < ds.n; ++i)
    m = std::max(m, static_cast<std::size_t>(ds.row_ptr[i + 1] - ds.row_ptr[i]));
  return m;
}

struct RunController {
  const SolveOptions& opt;
  double initial_gap = 0.0;
  double passes = 0.0;
  Clock::time_point t0 = Clock::now();
  Trace trace;
  bool stop = false;

  explicit RunController(const Problem& p, const SolveOptions& o,
                         std::span<const double> x0)
      : opt(o) {
    initial_gap = loss_value(p, x0) - opt.fstar;
    trace.push_back({0, 0, 0.0, 0.0, initial_gap});
    if (opt.on_epoch && !opt.on_epoch(trace.back())) stop = true;
    if (initial_gap <= opt.budget.target_subopt) stop = true;
  }

  // Records the row for a completed epoch and applies all stop conditions.
  void record(std::int64_t r, std::int64_t s, double subopt) {
    trace.push_back({r, s + 1, passes, seconds_since(t0), subopt});
    // The negated form also trips on NaN.
    if (!(subopt <= opt.divergence_factor * std::max(initial_gap, 1e-12)))
      throw DivergenceError(
          "suboptimality " + std::to_string(subopt) + " exceeds " +
          std::to_string(opt.divergence_factor) + "x the initial gap");
    if (subopt <= opt.budget.target_subopt) stop = true;
    if (passes >= opt.budget.max_passes) stop = true;
    if (opt.on_epoch && !opt.on_epoch(trace.back())) stop = true;
  }
};

}  // namespace

// Shared serial inner engine. theta = 1, phi = 0 reduces it to sparse SVRG;
// any theta in (0,1] is accepted.
SolverResult ss_acc_svrg(const Problem& p, const SolverParams& prm,
                         const SolveOptions& opt) {
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

  std::vector<double> x_r = initial_point(p, opt);
  RunController ctl(p, opt, x_r);

  SolverResult res;
  res.restart_gaps.push_back(ctl.initial_gap);

  std::vector<double> z = x_r;
  std::vector<double> x_tilde = x_r;
  std::vector<double> captured(static_cast<std::size_t>(d));
  std::vector<double> ybuf(max_row_nnz(p.data));
  std::vector<double> zsum, sum_snaps;
  std::vector<std::int64_t> held_since;
  const bool averaged = opt.snapshot == SnapshotMode::averaged;

  for (std::int64_t r = 0; !ctl.stop && r < max_restarts; ++r) {
    x_tilde = x_r;
    z = x_r;
    sum_snaps.assign(static_cast<std::size_t>(d), 0.0);
    std::int64_t s = 0;
    for (; s < prm.S && !ctl.stop; ++s) {
      const SnapshotContext snap = make_snapshot(p, x_tilde);
      const auto* xt = snap.x_tilde.data();
      const auto* dg = snap.dg_tilde.data();

      std::int64_t chosen_t = -1;
      if (!averaged) {
        chosen_t = static_cast<std::int64_t>(
            derive_stream(prm.seed, static_cast<std::uint64_t>(r),
                          static_cast<std::uint64_t>(s), kSnapshotStream)
                .next_below(static_cast<std::uint64_t>(m)));
      } else {
        zsum.assign(static_cast<std::size_t>(d), 0.0);
        held_since.assign(static_cast<std::size_t>(d), 0);
      }
      Rng rng = derive_stream(prm.seed, static_cast<std::uint64_t>(r),
                              static_cast<std::uint64_t>(s), 0);

      for (std::int64_t k = 0; k < m; ++k) {
        const auto i =
            static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (k == chosen_t) {
          // Densify y_t from the pre-update z across all coordinates.
          for (std::int64_t v = 0; v < d; ++v)
            captured[static_cast<std::size_t>(v)] = detail::couple_coord(
                z[static_cast<std::size_t>(v)], xt[v], dg[v], theta, omt, phi);
        }
        const auto row = p.data.row(i);
        double dot = 0.0;
        for (std::size_t t = 0; t < row.size(); ++t) {
          const auto v = static_cast<std::size_t>(row.idx[t]);
          const double y =
              detail::couple_coord(z[v], xt[v], dg[v], theta, omt, phi);
          ybuf[t] = y;
          dot += row.val[t] * y;
        }
        const double lp_diff =
            logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]) -
            snap.lprime[static_cast<std::size_t>(i)];
        for (std::size_t t = 0; t < row.size(); ++t) {
          const auto v = static_cast<std::size_t>(row.idx[t]);
          if (averaged) {
            // z_v was constant for iterations held_since[v] .. k inclusive.
            zsum[v] += static_cast<double>(k + 1 - held_since[v]) * z[v];
            held_since[v] = k + 1;
          }
          const double g = detail::estimator_coord(lp_diff, row.val[t],
                                                   p.mu_d[v], ybuf[t], xt[v],
                                                   dg[v]);
          z[v] -= eta * g;
        }
      }

      if (averaged) {
        for (std::int64_t v = 0; v < d; ++v) {
          const auto u = static_cast<std::size_t>(v);
          zsum[u] += static_cast<double>(m - held_since[u]) * z[u];
          captured[u] =
              (theta * zsum[u] +
               static_cast<double>(m) * (omt * xt[v] - phi * dg[v])) /
              static_cast<double>(m);
        }
      }
      x_tilde = captured;
      for (std::int64_t v = 0; v < d; ++v)
        sum_snaps[static_cast<std::size_t>(v)] +=
            x_tilde[static_cast<std::size_t>(v)];

      ctl.passes += static_cast<double>(n + 2 * m) / static_cast<double>(n);
      ++res.stats.epochs;
      ctl.record(r, s, loss_value(p, x_tilde) - opt.fstar);
    }

    if (s == prm.S) {
      for (std::int64_t v = 0; v < d; ++v)
        x_r[static_cast<std::size_t>(v)] =
            sum_snaps[static_cast<std::size_t>(v)] / static_cast<double>(s);
      ++res.stats.restarts_completed;
      res.restart_gaps.push_back(loss_value(p, x_r) - opt.fstar);
    }
  }

  res.x = x_tilde;
  res.final_z = std::move(z);
  res.trace = std::move(ctl.trace);
  return res;
}

SolverResult svrg_serial(const Problem& p, double step,
                         std::optional<std::int64_t> m, std::uint64_t seed,
                         const SolveOptions& opt) {
  SolverParams prm;
  prm.m = m.value_or(2 * p.n());
  prm.theta = 1.0;  // coupling collapses: y = z
  prm.phi = 0.0;
  prm.eta = step > 0.0 ? step : 1.0 / (4.0 * p.L);
  prm.S = std::numeric_limits<std::int64_t>::max();  // no restarts
  prm.L = p.L;
  prm.mu = p.mu;
  prm.kappa = p.kappa();
  prm.seed = seed;
  return ss_acc_svrg(p, prm, opt);
}

SolverResult saga_serial(const Problem& p, double step, std::uint64_t seed,
                         const SolveOptions& opt) {
  const std::int64_t n = p.n();
  const std::int64_t d = p.dim();
  const double gamma = step > 0.0 ? step : 1.0 / (3.0 * p.L);

  std::vector<double> x = initial_point(p, opt);
  RunController ctl(p, opt, x);

  // Stored loss derivative per sample and its running average over rows.
  std::vector<double> alpha(static_cast<std::size_t>(n));
  std::vector<double> abar(static_cast<std::size_t>(d), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto row = p.data.row(i);
    double dot = 0.0;
    for (std::size_t t = 0; t < row.size(); ++t)
      dot += row.val[t] * x[static_cast<std::size_t>(row.idx[t])];
    const double lp =
        logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]);
    alpha[static_cast<std::size_t>(i)] = lp;
    for (std::size_t t = 0; t < row.size(); ++t)
      abar[static_cast<std::size_t>(row.idx[t])] +=
          lp * row.val[t] / static_cast<double>(n);
  }
  ctl.passes += 1.0;  // table-fill pass

  SolverResult res;
  res.restart_gaps.push_back(ctl.initial_gap);

  for (std::int64_t chunk = 0; !ctl.stop; ++chunk) {
    Rng rng = derive_stream(seed, static_cast<std::uint64_t>(chunk), 0,
                            kSagaStream);
    for (std::int64_t k = 0; k < n; ++k) {
      const auto i =
          static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n)));
      const auto row = p.data.row(i);
      double dot = 0.0;
      for (std::size_t t = 0; t < row.size(); ++t)
        dot += row.val[t] * x[static_cast<std::size_t>(row.idx[t])];
      const double lp =
          logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]);
      const double diff = lp - alpha[static_cast<std::size_t>(i)];
      alpha[static_cast<std::size_t>(i)] = lp;
      for (std::size_t t = 0; t < row.size(); ++t) {
        const auto v = static_cast<std::size_t>(row.idx[t]);
        const double dv = p.reg == RegularizerMode::sparsified
                              ? p.profile.d_diag[v]
                              : 1.0;
        const double u = diff * row.val[t] + dv * abar[v] + p.mu_d[v] * x[v];
        x[v] -= gamma * u;
        abar[v] += diff * row.val[t] / static_cast<double>(n);
      }
    }
    ctl.passes += 1.0;
    ++res.stats.epochs;
    ctl.record(0, chunk, loss_value(p, x) - opt.fstar);
  }

  res.x = std::move(x);
  res.trace = std::move(ctl.trace);
  return res;
}

}  // namespace sparsevr

#include "sparsevr/harness.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "sparsevr/rng.hpp"

namespace sparsevr {

ScheduleTrace simulate_epoch(const Problem& p, const SolverParams& prm,
                             const HarnessConfig& cfg,
                             std::span<const double> x_tilde,
                             std::span<const double> z0) {
  const std::int64_t n = p.n();
  const std::int64_t d = p.dim();
  const std::int64_t m = prm.m;
  if (static_cast<std::int64_t>(x_tilde.size()) != d ||
      static_cast<std::int64_t>(z0.size()) != d)
    throw std::invalid_argument("x_tilde / z0 dimension mismatch");
  if (cfg.tau < 0) throw std::invalid_argument("tau must be >= 0");

  ScheduleTrace trace;
  trace.tau = cfg.tau;
  trace.policy = cfg.policy;
  if (trace.tau > m) {  // the epoch structure itself enforces tau <= m
    std::cerr << "simulate_epoch: tau " << trace.tau << " clamped to m = " << m
              << "\n";
    trace.tau = m;
    trace.tau_clamped = true;
  }
  trace.x_tilde.assign(x_tilde.begin(), x_tilde.end());
  trace.z0.assign(z0.begin(), z0.end());

  const SnapshotContext snap = make_snapshot(p, x_tilde);
  const double theta = prm.theta;
  const double omt = 1.0 - theta;
  const double phi = prm.phi;
  const double eta = prm.eta;

  Rng sample_rng = derive_stream(cfg.seed, 0, 0, 0);
  Rng mask_rng = derive_stream(cfg.seed, 0, 0, kMaskStream);

  std::vector<double> z(z0.begin(), z0.end());
  std::vector<double> y_support;
  trace.steps.reserve(static_cast<std::size_t>(m));

  for (std::int64_t k = 0; k < m; ++k) {
    ScheduleStep step;
    step.sample = static_cast<std::int64_t>(
        sample_rng.next_below(static_cast<std::uint64_t>(n)));
    step.z = z;
    step.zhat = z;

    if (cfg.policy != MaskPolicy::none) {
      const std::int64_t lo = std::max<std::int64_t>(k - trace.tau, 0);
      for (std::int64_t j = lo; j < k; ++j) {
        const auto& pending = trace.steps[static_cast<std::size_t>(j)].update;
        MaskEntry entry;
        entry.j = j;
        for (std::size_t t = 0; t < pending.support.size(); ++t) {
          const bool masked =
              cfg.policy == MaskPolicy::all_missing
                  ? true
                  : mask_rng.next_double() < cfg.bernoulli_q;
          if (!masked) continue;
          entry.coords.push_back(pending.support[t]);
          // Missing past updates re-enter with a + sign (the update itself
          // subtracted eta G).
          step.zhat[static_cast<std::size_t>(pending.support[t])] +=
              eta * pending.values[t];
        }
        if (!entry.coords.empty()) step.masks.push_back(std::move(entry));
      }
    }

    step.yhat.resize(static_cast<std::size_t>(d));
    for (std::int64_t v = 0; v < d; ++v)
      step.yhat[static_cast<std::size_t>(v)] = detail::couple_coord(
          step.zhat[static_cast<std::size_t>(v)], snap.x_tilde[static_cast<std::size_t>(v)],
          snap.dg_tilde[static_cast<std::size_t>(v)], theta, omt, phi);

    const auto row = p.data.row(step.sample);
    y_support.resize(row.size());
    for (std::size_t t = 0; t < row.size(); ++t)
      y_support[t] = step.yhat[static_cast<std::size_t>(row.idx[t])];
    step.update = sparse_svrg_estimator(p, step.sample, y_support, snap);

    for (std::size_t t = 0; t < step.update.support.size(); ++t)
      z[static_cast<std::size_t>(step.update.support[t])] -=
          eta * step.update.values[t];

    trace.steps.push_back(std::move(step));
  }
  trace.z_final = z;
  return trace;
}

std::string to_json_string(const CheckReport& r) {
  nlohmann::json j;
  j["check"] = r.check;
  j["trials"] = r.trials;
  j["max_margin"] = r.max_margin;
  j["violated"] = r.violated;
  j["worst_k"] = r.worst_k;
  return j.dump();
}

CheckReport check_overlap_bound(const Problem& p, const SolverParams& prm,
                                const HarnessConfig& cfg, std::int64_t trials) {
  if (trials < 100)
    throw std::invalid_argument("check_overlap_bound needs >= 100 trials");
  const std::int64_t m = prm.m;
  const double half_sd_eta = 0.5 * std::sqrt(p.profile.delta) * prm.eta;
  const auto tau_eff = static_cast<double>(std::min(cfg.tau, m));

  // Fixed start shared by all trials; per-trial sample/mask streams.
  Rng init = derive_stream(cfg.seed, 0xB00, 0, 0);
  std::vector<double> x_tilde(static_cast<std::size_t>(p.dim()));
  std::vector<double> z0(static_cast<std::size_t>(p.dim()));
  for (auto& v : x_tilde) v = 0.5 * init.next_symmetric();
  for (auto& v : z0) v = 0.5 * init.next_symmetric();

  std::vector<double> sum(static_cast<std::size_t>(m), 0.0);
  std::vector<double> sumsq(static_cast<std::size_t>(m), 0.0);
  std::vector<double> gsq(static_cast<std::size_t>(m));

  for (std::int64_t t = 0; t < trials; ++t) {
    HarnessConfig c = cfg;
    c.seed = detail::mix64(cfg.seed ^ static_cast<std::uint64_t>(t + 1));
    const ScheduleTrace trace = simulate_epoch(p, prm, c, x_tilde, z0);
    for (std::int64_t k = 0; k < m; ++k) {
      const auto& step = trace.steps[static_cast<std::size_t>(k)];
      double g2 = 0.0;
      double lhs = 0.0;
      for (std::size_t u = 0; u < step.update.support.size(); ++u) {
        const auto v = static_cast<std::size_t>(step.update.support[u]);
        g2 += step.update.values[u] * step.update.values[u];
        lhs += step.update.values[u] * (step.zhat[v] - step.z[v]);
      }
      gsq[static_cast<std::size_t>(k)] = g2;
      double pending = 0.0;
      const std::int64_t lo = std::max<std::int64_t>(k - trace.tau, 0);
      for (std::int64_t j = lo; j < k; ++j)
        pending += gsq[static_cast<std::size_t>(j)];
      const double x = lhs - half_sd_eta * (pending + tau_eff * g2);
      sum[static_cast<std::size_t>(k)] += x;
      sumsq[static_cast<std::size_t>(k)] += x * x;
    }
  }

  CheckReport rep;
  rep.check = "overlap";
  rep.trials = trials;
  rep.max_margin = -std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < m; ++k) {
    const double mean = sum[static_cast<std::size_t>(k)] / static_cast<double>(trials);
    const double var =
        std::max(0.0, sumsq[static_cast<std::size_t>(k)] / static_cast<double>(trials) -
                          mean * mean);
    const double se = std::sqrt(var / static_cast<double>(trials));
    const double margin = mean - 3.0 * se;
    if (margin > rep.max_margin) {
      rep.max_margin = margin;
      rep.worst_k = k;
    }
  }
  rep.violated = rep.max_margin > 1e-12;
  return rep;
}

namespace {

// || (1/n) sum_i (embedded G_i) - grad f(y) ||_inf and the exact second
// moment E_i || G_i - grad f(y) ||^2 by enumeration.
struct EnumeratedEstimator {
  double second_moment = 0.0;
  double max_bias = 0.0;
};

EnumeratedEstimator enumerate_estimator(const Problem& p,
                                        std::span<const double> y,
                                        const SnapshotContext& snap,
                                        std::span<const double> grad_y) {
  const std::int64_t n = p.n();
  const auto d = static_cast<std::size_t>(p.dim());
  std::vector<double> mean(d, 0.0);
  std::vector<double> y_sup;
  double sm = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto row = p.data.row(i);
    y_sup.resize(row.size());
    for (std::size_t t = 0; t < row.size(); ++t)
      y_sup[t] = y[static_cast<std::size_t>(row.idx[t])];
    const SparseGradient g = sparse_svrg_estimator(p, i, y_sup, snap);
    // ||G_i - grad f(y)||^2 with G_i embedded densely.
    double acc = 0.0;
    std::size_t t = 0;
    for (std::size_t v = 0; v < d; ++v) {
      double gv = 0.0;
      if (t < g.support.size() && static_cast<std::size_t>(g.support[t]) == v)
        gv = g.values[t++];
      const double diff = gv - grad_y[v];
      acc += diff * diff;
    }
    sm += acc;
    for (std::size_t u = 0; u < g.support.size(); ++u)
      mean[static_cast<std::size_t>(g.support[u])] += g.values[u];
  }
  EnumeratedEstimator out;
  out.second_moment = sm / static_cast<double>(n);
  for (std::size_t v = 0; v < d; ++v) {
    const double bias = mean[v] / static_cast<double>(n) - grad_y[v];
    out.max_bias = std::max(out.max_bias, std::abs(bias));
  }
  return out;
}

}  // namespace

CheckReport check_variance_bound(const Problem& p, std::int64_t trials,
                                 std::uint64_t seed) {
  const auto d = static_cast<std::size_t>(p.dim());
  const double safe_l = smoothness_constant(p.data, p.profile, p.mu, p.reg);
  Rng rng = derive_stream(seed, 0x7A, 0, 0);

  CheckReport rep;
  rep.check = "variance";
  rep.trials = trials;
  rep.max_margin = -std::numeric_limits<double>::infinity();

  std::vector<double> y(d), xt(d);
  for (std::int64_t t = 0; t < trials; ++t) {
    for (auto& v : y) v = rng.next_symmetric();
    for (auto& v : xt) v = rng.next_symmetric();
    const SnapshotContext snap = make_snapshot(p, xt);
    const std::vector<double> gy = full_gradient(p, y);

    double gy_sq = 0.0, gy_dg = 0.0, g_dg = 0.0, gxy = 0.0;
    for (std::size_t v = 0; v < d; ++v) {
      gy_sq += gy[v] * gy[v];
      gy_dg += gy[v] * snap.dg_tilde[v];
      g_dg += snap.g_tilde[v] * snap.dg_tilde[v];
      gxy += gy[v] * (xt[v] - y[v]);
    }
    const double bregman = loss_value(p, xt) - loss_value(p, y) - gxy;
    const double rhs = 2.0 * safe_l * bregman - gy_sq + 2.0 * gy_dg - g_dg;

    const EnumeratedEstimator e = enumerate_estimator(p, y, snap, gy);
    const double margin = e.second_moment - rhs;
    if (margin > rep.max_margin) {
      rep.max_margin = margin;
      rep.worst_k = t;
    }

    // Projection-idempotence identities behind the bound (P_i^2 = P_i on the
    // D-weighted terms): E_i ||D_i g~||^2 == <g~, D g~> and
    // E_i <grad f_i(y) - grad f_i(x~), D_i g~> == <grad f(y) - g~, D g~>.
    if (p.reg == RegularizerMode::sparsified) {
      double e_dig_sq = 0.0, e_cross = 0.0;
      std::vector<double> y_sup;
      for (std::int64_t i = 0; i < p.n(); ++i) {
        const auto row = p.data.row(i);
        double acc = 0.0, cross = 0.0;
        for (std::size_t u = 0; u < row.size(); ++u) {
          const auto v = static_cast<std::size_t>(row.idx[u]);
          acc += snap.dg_tilde[v] * snap.dg_tilde[v];
        }
        y_sup.resize(row.size());
        for (std::size_t u = 0; u < row.size(); ++u)
          y_sup[u] = y[static_cast<std::size_t>(row.idx[u])];
        double doty = 0.0, dotx = 0.0;
        for (std::size_t u = 0; u < row.size(); ++u) {
          doty += row.val[u] * y_sup[u];
          dotx += row.val[u] * xt[static_cast<std::size_t>(row.idx[u])];
        }
        const double b = p.data.labels[static_cast<std::size_t>(i)];
        const double lpd = logistic_deriv(doty, b) - logistic_deriv(dotx, b);
        for (std::size_t u = 0; u < row.size(); ++u) {
          const auto v = static_cast<std::size_t>(row.idx[u]);
          const double dgrad =
              lpd * row.val[u] + p.mu_d[v] * (y_sup[u] - xt[v]);
          cross += dgrad * snap.dg_tilde[v];
        }
        e_dig_sq += acc;
        e_cross += cross;
      }
      e_dig_sq /= static_cast<double>(p.n());
      e_cross /= static_cast<double>(p.n());
      double cross_exact = 0.0;
      for (std::size_t v = 0; v < d; ++v)
        cross_exact += (gy[v] - snap.g_tilde[v]) * snap.dg_tilde[v];
      const double scale = 1.0 + std::abs(g_dg) + std::abs(cross_exact);
      if (std::abs(e_dig_sq - g_dg) > 1e-10 * scale ||
          std::abs(e_cross - cross_exact) > 1e-10 * scale) {
        rep.violated = true;
        rep.max_margin = std::max(rep.max_margin,
                                  std::abs(e_dig_sq - g_dg) / scale);
        rep.worst_k = t;
      }
    }
  }
  if (rep.max_margin > 1e-9) rep.violated = true;
  return rep;
}

CheckReport check_unbiasedness(const Problem& p, std::int64_t points,
                               std::uint64_t seed) {
  const auto d = static_cast<std::size_t>(p.dim());
  Rng rng = derive_stream(seed, 0xBB, 0, 0);
  CheckReport rep;
  rep.check = "unbiased";
  rep.trials = points;
  rep.max_margin = 0.0;

  std::vector<double> y(d), xt(d);
  for (std::int64_t t = 0; t < points; ++t) {
    for (auto& v : y) v = rng.next_symmetric();
    for (auto& v : xt) v = rng.next_symmetric();
    const SnapshotContext snap = make_snapshot(p, xt);
    const std::vector<double> gy = full_gradient(p, y);
    const EnumeratedEstimator e = enumerate_estimator(p, y, snap, gy);
    if (e.max_bias > rep.max_margin) {
      rep.max_margin = e.max_bias;
      rep.worst_k = t;
    }
  }
  rep.violated = rep.max_margin > 1e-12;
  return rep;
}

CheckReport check_coupling_inequality(const Problem& p, std::int64_t trials,
                                      std::uint64_t seed,
                                      std::span<const double> x_star,
                                      double fstar) {
  const auto d = static_cast<std::size_t>(p.dim());
  if (x_star.size() != d) throw std::invalid_argument("x_star dimension");
  const double safe_l = smoothness_constant(p.data, p.profile, p.mu, p.reg);
  const SolverParams prm =
      derive_params_serial(p.n(), safe_l / p.mu, safe_l, 50.0);
  const double theta = prm.theta;
  const double eta = prm.eta;

  Rng rng = derive_stream(seed, 0xC0, 0, 0);
  CheckReport rep;
  rep.check = "coupling";
  rep.trials = trials;
  rep.max_margin = -std::numeric_limits<double>::infinity();

  std::vector<double> z(d), xt(d), y(d), y_sup;
  for (std::int64_t t = 0; t < trials; ++t) {
    for (std::size_t v = 0; v < d; ++v) {
      z[v] = x_star[v] + 0.5 * rng.next_symmetric();
      xt[v] = x_star[v] + 0.5 * rng.next_symmetric();
    }
    const SnapshotContext snap = make_snapshot(p, xt);
    for (std::size_t v = 0; v < d; ++v)
      y[v] = detail::couple_coord(z[v], xt[v], snap.dg_tilde[v], theta,
                                  1.0 - theta, prm.phi);

    double z_dist = 0.0;
    for (std::size_t v = 0; v < d; ++v)
      z_dist += (z[v] - x_star[v]) * (z[v] - x_star[v]);

    // E over i of ||z - eta G_i - x*||^2, sparse per-sample correction.
    double ez_next = 0.0;
    for (std::int64_t i = 0; i < p.n(); ++i) {
      const auto row = p.data.row(i);
      y_sup.resize(row.size());
      for (std::size_t u = 0; u < row.size(); ++u)
        y_sup[u] = y[static_cast<std::size_t>(row.idx[u])];
      const SparseGradient g = sparse_svrg_estimator(p, i, y_sup, snap);
      double delta = 0.0;
      for (std::size_t u = 0; u < g.support.size(); ++u) {
        const auto v = static_cast<std::size_t>(g.support[u]);
        delta += -2.0 * eta * g.values[u] * (z[v] - x_star[v]) +
                 eta * eta * g.values[u] * g.values[u];
      }
      ez_next += z_dist + delta;
    }
    ez_next /= static_cast<double>(p.n());

    const double lhs = loss_value(p, y) - fstar;
    const double rhs =
        (1.0 - theta) * (loss_value(p, xt) - fstar) +
        safe_l * theta * theta / (2.0 * (1.0 - theta)) * (z_dist - ez_next);
    const double margin = lhs - rhs;
    if (margin > rep.max_margin) {
      rep.max_margin = margin;
      rep.worst_k = t;
    }
  }
  rep.violated = rep.max_margin > 1e-8;
  return rep;
}

}  // namespace sparsevr

#include "sparsevr/objective.hpp"

#include <limits>
#include <stdexcept>

namespace sparsevr {

double smoothness_constant(const SparseDataset& ds, const SupportProfile& prof,
                           double mu, RegularizerMode reg) {
  double worst = 0.0;
  for (std::int64_t i = 0; i < ds.n; ++i) {
    const auto r = ds.row(i);
    double sq = 0.0;
    double max_dv = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t) {
      sq += r.val[t] * r.val[t];
      const double dv = reg == RegularizerMode::sparsified
                            ? prof.d_diag[static_cast<std::size_t>(r.idx[t])]
                            : 1.0;
      max_dv = std::max(max_dv, dv);
    }
    worst = std::max(worst, 0.25 * sq + mu * max_dv);
  }
  return worst;
}

Problem make_problem(SparseDataset ds, double mu, SmoothnessMode mode,
                     RegularizerMode reg, double explicit_L) {
  if (mu < 0.0) throw std::invalid_argument("mu must be >= 0");
  auto [compact, prof] = compute_support_profile(ds);
  Problem p;
  p.data = std::move(compact);
  p.profile = std::move(prof);
  p.mu = mu;
  p.reg = reg;

  if (explicit_L > 0.0) {
    p.L = explicit_L;
  } else if (mode == SmoothnessMode::safe) {
    p.L = smoothness_constant(p.data, p.profile, mu, reg);
  } else {
    double max_sq = 0.0;
    for (std::int64_t i = 0; i < p.data.n; ++i) {
      const auto r = p.data.row(i);
      double sq = 0.0;
      for (double v : r.val) sq += v * v;
      max_sq = std::max(max_sq, sq);
    }
    p.L = 0.25 * max_sq + mu;
  }
  if (p.L < mu) throw std::invalid_argument("L must be >= mu");

  p.mu_d.resize(static_cast<std::size_t>(p.data.d));
  for (std::int64_t v = 0; v < p.data.d; ++v)
    p.mu_d[static_cast<std::size_t>(v)] =
        reg == RegularizerMode::sparsified
            ? mu * p.profile.d_diag[static_cast<std::size_t>(v)]
            : mu;
  return p;
}

double loss_value(const Problem& p, std::span<const double> x) {
  if (static_cast<std::int64_t>(x.size()) != p.data.d)
    throw std::invalid_argument("dimension mismatch in loss_value");
  double loss = 0.0;
  for (std::int64_t i = 0; i < p.data.n; ++i) {
    const auto r = p.data.row(i);
    double dot = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t)
      dot += r.val[t] * x[static_cast<std::size_t>(r.idx[t])];
    loss += logistic_loss(dot, p.data.labels[static_cast<std::size_t>(i)]);
  }
  loss /= static_cast<double>(p.data.n);
  // (1/n) sum_i <x, D_i x> telescopes to ||x||^2 by construction of D.
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return loss + 0.5 * p.mu * sq;
}

void full_gradient(const Problem& p, std::span<const double> x,
                   std::span<double> out) {
  if (static_cast<std::int64_t>(x.size()) != p.data.d ||
      out.size() != x.size())
    throw std::invalid_argument("dimension mismatch in full_gradient");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::int64_t i = 0; i < p.data.n; ++i) {
    const auto r = p.data.row(i);
    double dot = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t)
      dot += r.val[t] * x[static_cast<std::size_t>(r.idx[t])];
    const double lp =
        logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]);
    for (std::size_t t = 0; t < r.size(); ++t)
      out[static_cast<std::size_t>(r.idx[t])] += lp * r.val[t];
  }
  const double inv_n = 1.0 / static_cast<double>(p.data.n);
  for (std::size_t v = 0; v < out.size(); ++v)
    out[v] = out[v] * inv_n + p.mu * x[v];
}

std::vector<double> full_gradient(const Problem& p, std::span<const double> x) {
  std::vector<double> g(x.size());
  full_gradient(p, x, g);
  return g;
}

SparseGradient partial_gradient(const Problem& p, std::int64_t i,
                                std::span<const double> x_on_support) {
  if (i < 0 || i >= p.data.n)
    throw std::out_of_range("sample index out of range");
  const auto r = p.data.row(i);
  if (x_on_support.size() != r.size())
    throw std::invalid_argument("x_on_support not aligned to T_i");
  double dot = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t)
    dot += r.val[t] * x_on_support[t];
  const double lp =
      logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]);
  SparseGradient g;
  g.support.assign(r.idx.begin(), r.idx.end());
  g.values.resize(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) {
    const auto v = static_cast<std::size_t>(r.idx[t]);
    g.values[t] = lp * r.val[t] + p.mu_d[v] * x_on_support[t];
  }
  return g;
}

SnapshotContext make_snapshot(const Problem& p,
                              std::span<const double> x_tilde) {
  if (static_cast<std::int64_t>(x_tilde.size()) != p.data.d)
    throw std::invalid_argument("dimension mismatch in make_snapshot");
  SnapshotContext snap;
  snap.x_tilde.assign(x_tilde.begin(), x_tilde.end());
  snap.g_tilde.assign(x_tilde.size(), 0.0);
  snap.lprime.resize(static_cast<std::size_t>(p.data.n));
  for (std::int64_t i = 0; i < p.data.n; ++i) {
    const auto r = p.data.row(i);
    double dot = 0.0;
    for (std::size_t t = 0; t < r.size(); ++t)
      dot += r.val[t] * x_tilde[static_cast<std::size_t>(r.idx[t])];
    const double lp =
        logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]);
    snap.lprime[static_cast<std::size_t>(i)] = lp;
    for (std::size_t t = 0; t < r.size(); ++t)
      snap.g_tilde[static_cast<std::size_t>(r.idx[t])] += lp * r.val[t];
  }
  const double inv_n = 1.0 / static_cast<double>(p.data.n);
  for (std::size_t v = 0; v < snap.g_tilde.size(); ++v)
    snap.g_tilde[v] = snap.g_tilde[v] * inv_n + p.mu * x_tilde[v];

  snap.dg_tilde.resize(snap.g_tilde.size());
  for (std::size_t v = 0; v < snap.g_tilde.size(); ++v)
    snap.dg_tilde[v] = p.reg == RegularizerMode::sparsified
                           ? p.profile.d_diag[v] * snap.g_tilde[v]
                           : snap.g_tilde[v];
  return snap;
}

SparseGradient sparse_svrg_estimator(const Problem& p, std::int64_t i,
                                     std::span<const double> y_on_support,
                                     const SnapshotContext& snap) {
  if (i < 0 || i >= p.data.n)
    throw std::out_of_range("sample index out of range");
  if (snap.g_tilde.size() != static_cast<std::size_t>(p.data.d))
    throw std::invalid_argument("stale snapshot: wrong dimension");
  const auto r = p.data.row(i);
  if (y_on_support.size() != r.size())
    throw std::invalid_argument("y_on_support not aligned to T_i");
  double dot = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t)
    dot += r.val[t] * y_on_support[t];
  const double lp_diff =
      logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]) -
      snap.lprime[static_cast<std::size_t>(i)];
  SparseGradient g;
  g.support.assign(r.idx.begin(), r.idx.end());
  g.values.resize(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) {
    const auto v = static_cast<std::size_t>(r.idx[t]);
    g.values[t] = detail::estimator_coord(lp_diff, r.val[t], p.mu_d[v],
                                          y_on_support[t], snap.x_tilde[v],
                                          snap.dg_tilde[v]);
  }
  return g;
}

}  // namespace sparsevr

#include <array>
#include <chrono>
#include <cmath>

#include "sparsevr/rng.hpp"
#include "sparsevr/solvers.hpp"

// Lagged-update implementations of the dense algorithms. Within an epoch an
// untouched coordinate evolves by a constant affine map; touching it applies
// the accumulated steps in closed form. The closed forms are composed by
// binary squaring (products only, no geometric-series quotients) so they stay
// accurate even when the per-step contraction is within ulps of 1.

namespace sparsevr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> start_point(const Problem& p, const SolveOptions& opt) {
  if (opt.x0.empty()) return std::vector<double>(p.dim(), 0.0);
  if (static_cast<std::int64_t>(opt.x0.size()) != p.dim())
    throw std::invalid_argument("x0 has wrong dimension");
  return opt.x0;
}

// t applications of z -> a z + b:
//   z' = pow_a z + b geo            (pow_a = a^t, geo = sum_{j<t} a^j)
//   sum of the t pre-update values = z geo + b geo2
// Composition law for l steps followed by r steps:
//   pow = pow_l pow_r, geo = geo_l + pow_l geo_r,
//   geo2 = geo2_l + geo_l geo_r + geo2_r.
struct ScalarAffinePow {
  double pow_a = 1.0;
  double geo = 0.0;
  double geo2 = 0.0;
};

ScalarAffinePow compose(const ScalarAffinePow& l, const ScalarAffinePow& r) {
  return {l.pow_a * r.pow_a, l.geo + l.pow_a * r.geo,
          l.geo2 + l.geo * r.geo + r.geo2};
}

ScalarAffinePow scalar_affine_pow(double a, std::int64_t t) {
  ScalarAffinePow acc;  // identity
  ScalarAffinePow base{a, 1.0, 0.0};
  while (t > 0) {
    if (t & 1) acc = compose(acc, base);
    t >>= 1;
    if (t) base = compose(base, base);
  }
  return acc;
}

// 3x3 companion for the Katyusha state [u, w, racc]: t applications of
// x -> M x + b give x' = Mp x + Sp b with Sp = sum_{j<t} M^j.
struct Mat3 {
  std::array<double, 9> a{};  // row major
  static Mat3 identity() {
    Mat3 m;
    m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return m;
  }
  static Mat3 zero() { return Mat3{}; }
};

Mat3 operator*(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.a[static_cast<std::size_t>(3 * i + j)] =
          x.a[static_cast<std::size_t>(3 * i)] * y.a[static_cast<std::size_t>(j)] +
          x.a[static_cast<std::size_t>(3 * i + 1)] *
              y.a[static_cast<std::size_t>(3 + j)] +
          x.a[static_cast<std::size_t>(3 * i + 2)] *
              y.a[static_cast<std::size_t>(6 + j)];
  return r;
}

Mat3 operator+(const Mat3& x, const Mat3& y) {
  Mat3 r;
  for (std::size_t i = 0; i < 9; ++i) r.a[i] = x.a[i] + y.a[i];
  return r;
}

struct MatAffinePow {
  Mat3 pow = Mat3::identity();
  Mat3 geo = Mat3::zero();
};

MatAffinePow compose(const MatAffinePow& l, const MatAffinePow& r) {
  // l steps first, then r steps: x -> Mr (Ml x + Sl b) + Sr b.
  return {r.pow * l.pow, r.pow * l.geo + r.geo};
}

MatAffinePow mat_affine_pow(const Mat3& m, std::int64_t t) {
  MatAffinePow acc;
  MatAffinePow base{m, Mat3::identity()};
  while (t > 0) {
    if (t & 1) acc = compose(acc, base);
    t >>= 1;
    if (t) base = compose(base, base);
  }
  return acc;
}

std::size_t max_row_nnz(const SparseDataset& ds) {
  std::size_t m = 0;
  for (std::int64_t i = 0; i < ds.n; ++i)
    m = std::max(m, static_cast<std::size_t>(ds.row_ptr[i + 1] - ds.row_ptr[i]));
  return m;
}

// Loss-part-only snapshot, used by the composite Katyusha baseline.
struct LossSnapshot {
  std::vector<double> g_loss;  // (1/n) sum_i l'_i(<a_i,x~>) a_i
  std::vector<double> lprime;
};

LossSnapshot make_loss_snapshot(const Problem& p,
                                std::span<const double> x_tilde) {
  LossSnapshot snap;
  snap.g_loss.assign(x_tilde.size(), 0.0);
  snap.lprime.resize(static_cast<std::size_t>(p.n()));
  for (std::int64_t i = 0; i < p.n(); ++i) {
    const auto row = p.data.row(i);
    double dot = 0.0;
    for (std::size_t t = 0; t < row.size(); ++t)
      dot += row.val[t] * x_tilde[static_cast<std::size_t>(row.idx[t])];
    const double lp =
        logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]);
    snap.lprime[static_cast<std::size_t>(i)] = lp;
    for (std::size_t t = 0; t < row.size(); ++t)
      snap.g_loss[static_cast<std::size_t>(row.idx[t])] += lp * row.val[t];
  }
  const double inv_n = 1.0 / static_cast<double>(p.n());
  for (auto& v : snap.g_loss) v *= inv_n;
  return snap;
}

}  // namespace

SolverResult lagged_ss_acc_svrg(const Problem& p, const SolverParams& prm,
                                const SolveOptions& opt) {
  if (p.reg != RegularizerMode::dense)
    throw std::invalid_argument(
        "lagged_ss_acc_svrg requires a dense-regularizer problem");
  const std::int64_t n = p.n();
  const std::int64_t d = p.dim();
  const std::int64_t m = prm.m;
  if (m < 1) throw std::invalid_argument("params.m must be >= 1");
  const double theta = prm.theta;
  const double omt = 1.0 - theta;
  const double phi = prm.phi;
  const double eta = prm.eta;
  const double mu = p.mu;
  const std::int64_t max_restarts =
      std::min(prm.R > 0 ? prm.R : std::numeric_limits<std::int64_t>::max(),
               opt.budget.max_restarts);

  std::vector<double> x_r = start_point(p, opt);
  const double initial_gap = loss_value(p, x_r) - opt.fstar;
  const Clock::time_point t0 = Clock::now();

  SolverResult res;
  res.trace.push_back({0, 0, 0.0, 0.0, initial_gap});
  res.restart_gaps.push_back(initial_gap);
  bool stop = initial_gap <= opt.budget.target_subopt;
  if (opt.on_epoch && !opt.on_epoch(res.trace.front())) stop = true;
  double passes = 0.0;

  std::vector<double> z = x_r;
  std::vector<double> x_tilde = x_r;
  std::vector<double> zsum(static_cast<std::size_t>(d));
  std::vector<std::int64_t> last(static_cast<std::size_t>(d));
  std::vector<double> coupling_c(static_cast<std::size_t>(d));
  std::vector<double> idle_b(static_cast<std::size_t>(d));
  std::vector<double> sum_snaps(static_cast<std::size_t>(d));
  std::vector<double> ybuf(max_row_nnz(p.data));

  for (std::int64_t r = 0; !stop && r < max_restarts; ++r) {
    x_tilde = x_r;
    z = x_r;
    sum_snaps.assign(sum_snaps.size(), 0.0);
    std::int64_t s = 0;
    for (; s < prm.S && !stop; ++s) {
      const SnapshotContext snap = make_snapshot(p, x_tilde);
      const auto* xt = snap.x_tilde.data();
      const auto* g = snap.g_tilde.data();  // dense mode: D g~ == g~
      // Off-support recurrence z <- A z + B_v, derived from the dense update
      // with a zero loss term.
      const double idle_a = 1.0 - eta * mu * theta;
      for (std::int64_t v = 0; v < d; ++v) {
        const auto uv = static_cast<std::size_t>(v);
        coupling_c[uv] = omt * xt[v] - phi * g[v];
        idle_b[uv] = -eta * (mu * coupling_c[uv] - mu * xt[v] + g[v]);
      }
      zsum.assign(zsum.size(), 0.0);
      last.assign(last.size(), 0);

      auto catch_up = [&](std::size_t v, std::int64_t k) {
        const std::int64_t gap = k - last[v];
        if (gap <= 0) return;
        if (gap == 1) {
          zsum[v] += z[v];
          z[v] = idle_a * z[v] + idle_b[v];
        } else {
          const ScalarAffinePow ap = scalar_affine_pow(idle_a, gap);
          zsum[v] += z[v] * ap.geo + idle_b[v] * ap.geo2;
          z[v] = ap.pow_a * z[v] + idle_b[v] * ap.geo;
        }
        last[v] = k;
      };

      Rng rng = derive_stream(prm.seed, static_cast<std::uint64_t>(r),
                              static_cast<std::uint64_t>(s), 0);
      for (std::int64_t k = 0; k < m; ++k) {
        const auto i = static_cast<std::int64_t>(
            rng.next_below(static_cast<std::uint64_t>(n)));
        const auto row = p.data.row(i);
        double dot = 0.0;
        for (std::size_t t = 0; t < row.size(); ++t) {
          const auto v = static_cast<std::size_t>(row.idx[t]);
          catch_up(v, k);
          const double y = theta * z[v] + coupling_c[v];
          ybuf[t] = y;
          dot += row.val[t] * y;
        }
        const double lp_diff =
            logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]) -
            snap.lprime[static_cast<std::size_t>(i)];
        for (std::size_t t = 0; t < row.size(); ++t) {
          const auto v = static_cast<std::size_t>(row.idx[t]);
          const double gv =
              lp_diff * row.val[t] + mu * (ybuf[t] - xt[row.idx[t]]) + g[row.idx[t]];
          zsum[v] += z[v];
          z[v] -= eta * gv;
          last[v] = k + 1;
        }
      }

      for (std::int64_t v = 0; v < d; ++v) {
        const auto uv = static_cast<std::size_t>(v);
        catch_up(uv, m);
        x_tilde[uv] = (theta * zsum[uv] +
                       static_cast<double>(m) * coupling_c[uv]) /
                      static_cast<double>(m);
        sum_snaps[uv] += x_tilde[uv];
      }

      passes += static_cast<double>(n + 2 * m) / static_cast<double>(n);
      ++res.stats.epochs;
      const double sub = loss_value(p, x_tilde) - opt.fstar;
      res.trace.push_back({r, s + 1, passes, seconds_since(t0), sub});
      if (!(sub <= opt.divergence_factor * std::max(initial_gap, 1e-12)))
        throw DivergenceError("lagged_ss_acc_svrg diverged");
      if (sub <= opt.budget.target_subopt) stop = true;
      if (passes >= opt.budget.max_passes) stop = true;
      if (opt.on_epoch && !opt.on_epoch(res.trace.back())) stop = true;
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
  return res;
}

KatyushaParams derive_katyusha_params(std::int64_t n, double kappa, double L,
                                      std::optional<std::int64_t> m_override,
                                      std::uint64_t seed) {
  if (n < 1 || kappa < 1.0 || L <= 0.0)
    throw std::invalid_argument("need n >= 1, kappa >= 1, L > 0");
  KatyushaParams k;
  k.m = m_override.value_or(2 * n);
  k.tau2 = 0.5;
  k.tau1 = std::min(std::sqrt(static_cast<double>(k.m) / (3.0 * kappa)), 0.5);
  k.alpha = 1.0 / (3.0 * k.tau1 * L);
  k.L = L;
  k.mu = L / kappa;
  k.theta_weight =
      1.0 + std::min(k.alpha * k.mu, 0.25 / static_cast<double>(k.m));
  k.seed = seed;
  return k;
}

SolverResult lagged_katyusha(const Problem& p, const KatyushaParams& prm,
                             const SolveOptions& opt) {
  if (p.reg != RegularizerMode::dense)
    throw std::invalid_argument(
        "lagged_katyusha requires a dense-regularizer problem");
  const std::int64_t n = p.n();
  const std::int64_t d = p.dim();
  const std::int64_t m = prm.m;
  const double tau1 = prm.tau1;
  const double tau2 = prm.tau2;
  const double tau3 = 1.0 - tau1 - tau2;
  const double alpha = prm.alpha;
  const double mu = p.mu;
  const double inv3l = 1.0 / (3.0 * prm.L);
  const double iu = 1.0 / (1.0 + alpha * mu);   // mirror prox contraction
  const double iw = 1.0 / (1.0 + mu * inv3l);   // primal prox contraction
  const double tw = prm.theta_weight;
  const double inv_tw = 1.0 / tw;

  std::vector<double> x_tilde = start_point(p, opt);
  const double initial_gap = loss_value(p, x_tilde) - opt.fstar;
  const Clock::time_point t0 = Clock::now();

  SolverResult res;
  res.trace.push_back({0, 0, 0.0, 0.0, initial_gap});
  res.restart_gaps.push_back(initial_gap);
  bool stop = initial_gap <= opt.budget.target_subopt;
  if (opt.on_epoch && !opt.on_epoch(res.trace.front())) stop = true;
  double passes = 0.0;

  std::vector<double> u = x_tilde;  // mirror sequence
  std::vector<double> w = x_tilde;  // primal sequence
  std::vector<double> racc(static_cast<std::size_t>(d));
  std::vector<std::int64_t> last(static_cast<std::size_t>(d));
  std::vector<double> xbuf(max_row_nnz(p.data));

  // theta^{m-1} and the weight normalizer sum_{k<m} theta^k.
  const ScalarAffinePow tw_pow = scalar_affine_pow(tw, m);
  const double norm_w = tw == 1.0 ? static_cast<double>(m) : tw_pow.geo;
  const double tw_last = tw_pow.pow_a / tw;  // theta^{m-1}

  // Idle map on [u, w, racc] (loss gradient term is the constant g_loss_v):
  //   u'    = iu u - (alpha iu) gl_v
  //   w'    = iw tau1 u + iw tau3 w + iw (tau2 xt_v - gl_v/(3L))
  //   racc' = racc/tw + w'
  Mat3 idle_m;
  idle_m.a = {iu, 0.0, 0.0,                      //
              iw * tau1, iw * tau3, 0.0,         //
              iw * tau1, iw * tau3, inv_tw};

  for (std::int64_t s = 0; !stop; ++s) {
    const LossSnapshot snap = make_loss_snapshot(p, x_tilde);
    const auto* gl = snap.g_loss.data();
    const auto* xt = x_tilde.data();
    racc.assign(racc.size(), 0.0);
    last.assign(last.size(), 0);

    auto idle_bias = [&](std::size_t v, double* b) {
      b[0] = -alpha * iu * gl[v];
      b[1] = iw * (tau2 * xt[v] - gl[v] * inv3l);
      b[2] = b[1];
    };

    auto catch_up = [&](std::size_t v, std::int64_t k) {
      const std::int64_t gap = k - last[v];
      if (gap <= 0) return;
      double b[3];
      idle_bias(v, b);
      if (gap == 1) {
        const double u1 = iu * u[v] + b[0];
        const double w1 = iw * tau1 * u[v] + iw * tau3 * w[v] + b[1];
        racc[v] = inv_tw * racc[v] + w1;
        u[v] = u1;
        w[v] = w1;
      } else {
        const MatAffinePow mp = mat_affine_pow(idle_m, gap);
        const double st[3] = {u[v], w[v], racc[v]};
        double out[3];
        for (int i = 0; i < 3; ++i) {
          out[i] = mp.pow.a[static_cast<std::size_t>(3 * i)] * st[0] +
                   mp.pow.a[static_cast<std::size_t>(3 * i + 1)] * st[1] +
                   mp.pow.a[static_cast<std::size_t>(3 * i + 2)] * st[2] +
                   mp.geo.a[static_cast<std::size_t>(3 * i)] * b[0] +
                   mp.geo.a[static_cast<std::size_t>(3 * i + 1)] * b[1] +
                   mp.geo.a[static_cast<std::size_t>(3 * i + 2)] * b[2];
        }
        u[v] = out[0];
        w[v] = out[1];
        racc[v] = out[2];
      }
      last[v] = k;
    };

    Rng rng = derive_stream(prm.seed, 0, static_cast<std::uint64_t>(s), 0);
    for (std::int64_t k = 0; k < m; ++k) {
      const auto i =
          static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(n)));
      const auto row = p.data.row(i);
      double dot = 0.0;
      for (std::size_t t = 0; t < row.size(); ++t) {
        const auto v = static_cast<std::size_t>(row.idx[t]);
        catch_up(v, k);
        const double xk = tau1 * u[v] + tau2 * xt[row.idx[t]] + tau3 * w[v];
        xbuf[t] = xk;
        dot += row.val[t] * xk;
      }
      const double lp_diff =
          logistic_deriv(dot, p.data.labels[static_cast<std::size_t>(i)]) -
          snap.lprime[static_cast<std::size_t>(i)];
      for (std::size_t t = 0; t < row.size(); ++t) {
        const auto v = static_cast<std::size_t>(row.idx[t]);
        const double gv = lp_diff * row.val[t] + gl[row.idx[t]];
        const double u1 = iu * (u[v] - alpha * gv);
        const double w1 = iw * (xbuf[t] - gv * inv3l);
        racc[v] = inv_tw * racc[v] + w1;
        u[v] = u1;
        w[v] = w1;
        last[v] = k + 1;
      }
    }

    std::vector<double> next(static_cast<std::size_t>(d));
    for (std::int64_t v = 0; v < d; ++v) {
      const auto uv = static_cast<std::size_t>(v);
      catch_up(uv, m);
      next[uv] = racc[uv] * tw_last / norm_w;
    }
    x_tilde = std::move(next);

    passes += static_cast<double>(n + 2 * m) / static_cast<double>(n);
    ++res.stats.epochs;
    const double sub = loss_value(p, x_tilde) - opt.fstar;
    res.trace.push_back({0, s + 1, passes, seconds_since(t0), sub});
    if (!(sub <= opt.divergence_factor * std::max(initial_gap, 1e-12)))
      throw DivergenceError("lagged_katyusha diverged");
    if (sub <= opt.budget.target_subopt) stop = true;
    if (passes >= opt.budget.max_passes) stop = true;
    if (opt.on_epoch && !opt.on_epoch(res.trace.back())) stop = true;
  }

  res.x = x_tilde;
  return res;
}

}  // namespace sparsevr

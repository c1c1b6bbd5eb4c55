#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "sparsevr/dataset.hpp"

namespace sparsevr {

enum class RegularizerMode {
  sparsified,  // f_i = loss_i + (mu/2) <x, D_i x>; supports stay sparse
  dense,       // f_i = loss_i + (mu/2) ||x||^2; used by lagged-update solvers
};

enum class SmoothnessMode { nominal, safe };

// l2-regularized logistic regression over a compacted sparse dataset.
// Immutable after construction; gradient operations are pure and the object
// can be shared read-only across threads.
struct Problem {
  SparseDataset data;
  SupportProfile profile;
  double mu = 0.0;
  double L = 0.25;
  RegularizerMode reg = RegularizerMode::sparsified;

  // mu * D_vv in sparsified mode, mu in dense mode; the per-coordinate
  // regularizer slope used by every inner loop.
  std::vector<double> mu_d;

  std::int64_t n() const { return data.n; }
  std::int64_t dim() const { return data.d; }
  double kappa() const {
    return mu > 0.0 ? L / mu : std::numeric_limits<double>::infinity();
  }
};

// Safe per-sample bound: max_i [0.25 ||a_i||^2 + mu * max_{v in T_i} D_vv]
// (dense mode replaces the D factor by 1).
double smoothness_constant(const SparseDataset& ds, const SupportProfile& prof,
                           double mu, RegularizerMode reg);

// Compacts the dataset, computes the support profile and fills in L.
// With SmoothnessMode::nominal, L = 0.25 * max_i ||a_i||^2 + mu (the dense
// regime the experiments run in); explicit_L > 0 overrides both modes.
Problem make_problem(SparseDataset ds, double mu,
                     SmoothnessMode mode = SmoothnessMode::nominal,
                     RegularizerMode reg = RegularizerMode::sparsified,
                     double explicit_L = 0.0);

// d/dt log(1+exp(-b t)) = -b * sigmoid(-b t), branch-stable for large |t|.
inline double logistic_deriv(double t, double b) {
  const double bt = b * t;
  if (bt > 0.0) {
    const double e = std::exp(-bt);
    return -b * e / (1.0 + e);
  }
  return -b / (1.0 + std::exp(bt));
}

inline double logistic_loss(double t, double b) {
  const double bt = b * t;
  if (bt > 0.0) return std::log1p(std::exp(-bt));
  return -bt + std::log1p(std::exp(bt));
}

double loss_value(const Problem& p, std::span<const double> x);

void full_gradient(const Problem& p, std::span<const double> x,
                   std::span<double> out);
std::vector<double> full_gradient(const Problem& p, std::span<const double> x);

// Gradient restricted to one sample's support.
struct SparseGradient {
  std::vector<std::int32_t> support;
  std::vector<double> values;
};

// [grad f_i(x)]_{T_i} given the values of x on T_i (aligned to the row).
SparseGradient partial_gradient(const Problem& p, std::int64_t i,
                                std::span<const double> x_on_support);

// Per-epoch anchor state: x~, g~ = grad f(x~), Dg~ = D g~ and the per-sample
// loss derivatives at x~ (so grad f_i(x~) never has to be recomputed).
struct SnapshotContext {
  std::vector<double> x_tilde;
  std::vector<double> g_tilde;
  std::vector<double> dg_tilde;  // D g~ (sparsified) or g~ (dense mode)
  std::vector<double> lprime;    // lprime[i] = l'_i(<a_i, x~>)

  bool matches(std::span<const double> x) const {
    if (x.size() != x_tilde.size()) return false;
    for (std::size_t v = 0; v < x.size(); ++v)
      if (x[v] != x_tilde[v]) return false;
    return true;
  }
};

SnapshotContext make_snapshot(const Problem& p, std::span<const double> x_tilde);

// G = grad f_i(y)|_{T_i} - grad f_i(x~)|_{T_i} + [D g~]_{T_i}, the sparse
// variance-reduced estimator; unbiased over uniform i.
SparseGradient sparse_svrg_estimator(const Problem& p, std::int64_t i,
                                     std::span<const double> y_on_support,
                                     const SnapshotContext& snap);

namespace detail {

// One coordinate of the coupling y = theta z + (1-theta) x~ - phi Dg~.
// Serial and asynchronous engines share this expression so their
// single-thread trajectories agree bit for bit.
inline double couple_coord(double z, double xt, double dg, double theta,
                           double one_minus_theta, double phi) {
  return theta * z + one_minus_theta * xt - phi * dg;
}

// One coordinate of the estimator given lp_diff = l'(y) - l'(x~).
inline double estimator_coord(double lp_diff, double a, double mu_dv, double y,
                              double xt, double dg) {
  return lp_diff * a + mu_dv * (y - xt) + dg;
}

}  // namespace detail

}  // namespace sparsevr

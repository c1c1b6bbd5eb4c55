#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sparsevr/fstar.hpp"
#include "sparsevr/rng.hpp"
#include "sparsevr/harness.hpp"
#include "sparsevr/solvers.hpp"
#include "test_util.hpp"

using namespace sparsevr;

namespace {

struct Instance {
  Problem p;
  SolverParams prm;
  std::vector<double> xt, z0;
};

Instance small_instance(std::uint64_t seed, std::int64_t m = 64) {
  Instance inst{testutil::make_random_problem(40, 18, 5, 1e-2, seed),
                {},
                {},
                {}};
  inst.prm = derive_params_serial(inst.p.n(), inst.p.kappa(), inst.p.L, 50.0, m);
  inst.prm.seed = seed;
  Rng rng(seed ^ 0xABCD);
  inst.xt.resize(static_cast<std::size_t>(inst.p.dim()));
  inst.z0.resize(static_cast<std::size_t>(inst.p.dim()));
  for (auto& v : inst.xt) v = 0.4 * rng.next_symmetric();
  for (auto& v : inst.z0) v = 0.4 * rng.next_symmetric();
  return inst;
}

}  // namespace

TEST_CASE("policy none reproduces the serial epoch bit for bit") {
  const Instance inst = small_instance(3, 80);  // m = 2n = 80 default shape
  HarnessConfig cfg;
  cfg.policy = MaskPolicy::none;
  cfg.seed = inst.prm.seed;

  // Start the solver from the same (x~, z) pair: x0 = x~ = z0 requires a
  // common start, so use x0 for all three roles.
  SolverParams prm = inst.prm;
  prm.m = 2 * inst.p.n();
  SolveOptions opt;
  opt.x0 = inst.xt;
  opt.budget.max_passes = 0.1;  // one epoch
  const SolverResult run = ss_acc_svrg(inst.p, prm, opt);

  const ScheduleTrace tr =
      simulate_epoch(inst.p, prm, cfg, inst.xt, inst.xt);
  REQUIRE(run.final_z.size() == tr.z_final.size());
  for (std::size_t v = 0; v < tr.z_final.size(); ++v)
    CHECK(tr.z_final[v] == run.final_z[v]);

  for (const auto& step : tr.steps) {
    CHECK(step.masks.empty());
    CHECK(step.zhat == step.z);
  }
}

TEST_CASE("replay consistency: zhat reconstructs bitwise from the log") {
  const Instance inst = small_instance(7);
  HarnessConfig cfg;
  cfg.policy = MaskPolicy::bernoulli;
  cfg.bernoulli_q = 0.6;
  cfg.tau = 9;
  cfg.seed = 1234;
  const ScheduleTrace tr =
      simulate_epoch(inst.p, inst.prm, cfg, inst.xt, inst.z0);
  for (const auto& step : tr.steps) {
    std::vector<double> z = step.z;
    for (const auto& mask : step.masks) {
      const auto& upd = tr.steps[static_cast<std::size_t>(mask.j)].update;
      for (std::int32_t c : mask.coords) {
        // Locate the coordinate inside the pending update's support.
        std::size_t t = 0;
        while (upd.support[t] != c) ++t;
        z[static_cast<std::size_t>(c)] += inst.prm.eta * upd.values[t];
      }
    }
    CHECK(z == step.zhat);
  }
}

TEST_CASE("all-missing with tau = 1 adds back exactly the previous update") {
  const Instance inst = small_instance(11);
  HarnessConfig cfg;
  cfg.policy = MaskPolicy::all_missing;
  cfg.tau = 1;
  cfg.seed = 99;
  const ScheduleTrace tr =
      simulate_epoch(inst.p, inst.prm, cfg, inst.xt, inst.z0);
  for (std::size_t k = 1; k < tr.steps.size(); ++k) {
    const auto& prev = tr.steps[k - 1].update;
    std::vector<double> want = tr.steps[k].z;
    for (std::size_t t = 0; t < prev.support.size(); ++t)
      want[static_cast<std::size_t>(prev.support[t])] +=
          inst.prm.eta * prev.values[t];
    CHECK(want == tr.steps[k].zhat);
  }
}

TEST_CASE("perturbed equivalent-update identity") {
  const Instance inst = small_instance(13);
  HarnessConfig cfg;
  cfg.policy = MaskPolicy::bernoulli;
  cfg.tau = 5;
  cfg.seed = 71;
  const ScheduleTrace tr =
      simulate_epoch(inst.p, inst.prm, cfg, inst.xt, inst.z0);
  const double theta = inst.prm.theta;
  for (std::size_t k = 1; k < tr.steps.size(); ++k) {
    const auto& a = tr.steps[k];
    const auto& b = tr.steps[k - 1];
    for (std::size_t v = 0; v < a.yhat.size(); ++v) {
      const double lhs = a.yhat[v] - b.yhat[v];
      const double rhs = theta * (a.zhat[v] - b.zhat[v]);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("tau larger than m is clamped") {
  const Instance inst = small_instance(17, 16);
  HarnessConfig cfg;
  cfg.policy = MaskPolicy::all_missing;
  cfg.tau = 1000;
  cfg.seed = 5;
  const ScheduleTrace tr =
      simulate_epoch(inst.p, inst.prm, cfg, inst.xt, inst.z0);
  CHECK(tr.tau == 16);
  CHECK(tr.tau_clamped);
}

TEST_CASE("overlap bound holds on the identity synthetic (delta = 1/n)") {
  const Problem p = testutil::make_identity_problem(100, 1e-3, 19);
  SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0, 64);
  HarnessConfig cfg;
  cfg.tau = 5;
  cfg.policy = MaskPolicy::all_missing;
  cfg.seed = 2;
  const CheckReport rep = check_overlap_bound(p, prm, cfg, 300);
  CHECK_FALSE(rep.violated);
  CHECK(rep.trials == 300);
}

TEST_CASE("overlap bound holds on an adversarial delta = 1 dataset") {
  // Single shared coordinate in every support.
  SparseDataset ds;
  ds.n = 20;
  ds.d = 1;
  ds.row_ptr.push_back(0);
  Rng rng(23);
  for (int i = 0; i < 20; ++i) {
    ds.col_idx.push_back(0);
    ds.values.push_back(rng.next_bool() ? 1.0 : -1.0);
    ds.labels.push_back(rng.next_bool() ? 1.0 : -1.0);
    ds.row_ptr.push_back(ds.col_idx.size());
  }
  const Problem p = make_problem(std::move(ds), 1e-2);
  REQUIRE(p.profile.delta == 1.0);
  SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0, 32);
  for (MaskPolicy policy : {MaskPolicy::all_missing, MaskPolicy::bernoulli}) {
    HarnessConfig cfg;
    cfg.tau = 3;
    cfg.policy = policy;
    cfg.seed = 31;
    CHECK_FALSE(check_overlap_bound(p, prm, cfg, 200).violated);
  }
}

TEST_CASE("overlap bound with tau = 0 reports zero margin") {
  const Problem p = testutil::make_identity_problem(50, 1e-3, 29);
  SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0, 32);
  HarnessConfig cfg;
  cfg.tau = 0;
  cfg.policy = MaskPolicy::all_missing;
  cfg.seed = 7;
  const CheckReport rep = check_overlap_bound(p, prm, cfg, 150);
  CHECK_FALSE(rep.violated);
  CHECK(rep.max_margin == 0.0);
  CHECK_THROWS_AS(check_overlap_bound(p, prm, cfg, 50), std::invalid_argument);
}

TEST_CASE("variance bound: no violations on random instances") {
  for (std::uint64_t seed : {31ULL, 37ULL, 41ULL}) {
    const Problem p = testutil::make_random_problem(60, 24, 5, 1e-2, seed);
    const CheckReport rep = check_variance_bound(p, 150, seed);
    CHECK_FALSE(rep.violated);
    CHECK(rep.max_margin <= 1e-9);
  }
}

TEST_CASE("variance bound on dense data matches the completed square") {
  // With D = I the last three terms collapse: RHS = 2L B - ||gy - g~||^2.
  const Problem p = make_problem(
      normalize_rows(gen_random_sparse(25, 8, 8, 43)), 1e-2,
      SmoothnessMode::safe);
  REQUIRE(p.profile.delta == 1.0);
  Rng rng(47);
  const auto d = static_cast<std::size_t>(p.dim());
  std::vector<double> y(d), xt(d);
  for (auto& v : y) v = rng.next_symmetric();
  for (auto& v : xt) v = rng.next_symmetric();
  const SnapshotContext snap = make_snapshot(p, xt);
  const std::vector<double> gy = full_gradient(p, y);
  double gy_sq = 0.0, gy_dg = 0.0, g_dg = 0.0, diff_sq = 0.0;
  for (std::size_t v = 0; v < d; ++v) {
    gy_sq += gy[v] * gy[v];
    gy_dg += gy[v] * snap.dg_tilde[v];
    g_dg += snap.g_tilde[v] * snap.dg_tilde[v];
    diff_sq += (gy[v] - snap.g_tilde[v]) * (gy[v] - snap.g_tilde[v]);
  }
  const double tail = -gy_sq + 2.0 * gy_dg - g_dg;
  CHECK(tail == doctest::Approx(-diff_sq).epsilon(1e-10));
}

TEST_CASE("variance is exactly zero for n = 1") {
  std::istringstream in("+1 1:0.6 2:0.8\n");
  const Problem p = make_problem(parse_libsvm(in), 0.0);
  const CheckReport rep = check_variance_bound(p, 25, 3);
  CHECK_FALSE(rep.violated);
  // G_y = grad f(y) when n = 1, so the variance itself vanishes; the margin
  // is just -RHS <= 0.
  const SnapshotContext snap = make_snapshot(p, std::vector<double>{0.1, -0.2});
  const std::vector<double> y = {0.3, 0.4};
  const std::vector<double> gy = full_gradient(p, y);
  const SparseGradient g = sparse_svrg_estimator(p, 0, y, snap);
  for (std::size_t t = 0; t < g.values.size(); ++t)
    CHECK(g.values[t] == doctest::Approx(gy[t]).epsilon(1e-13));
}

TEST_CASE("unbiasedness check: exact enumeration within 1e-12") {
  const Problem p = testutil::make_random_problem(50, 20, 4, 1e-3, 53);
  const CheckReport rep = check_unbiasedness(p, 20, 53);
  CHECK_FALSE(rep.violated);
  CHECK(rep.max_margin <= 1e-12);

  // Identity synthetic: D_i g~ = n g~ on T_i and the average recovers g~.
  const Problem ident = testutil::make_identity_problem(64, 1e-3, 59);
  CHECK_FALSE(check_unbiasedness(ident, 10, 59).violated);
}

TEST_CASE("coupling inequality with exact expectation over i") {
  const Problem p = testutil::make_random_problem(30, 12, 4, 1e-2, 61,
                                                  SmoothnessMode::safe);
  const FStarResult fs = estimate_fstar(p, 3000.0);
  REQUIRE(fs.converged);
  const CheckReport rep =
      check_coupling_inequality(p, 200, 61, fs.x_star, fs.fstar);
  CHECK_FALSE(rep.violated);
  CHECK(rep.max_margin <= 1e-8);
}

TEST_CASE("reports serialize to the documented JSON shape") {
  CheckReport rep;
  rep.check = "overlap";
  rep.trials = 100;
  rep.max_margin = -0.5;
  rep.violated = false;
  rep.worst_k = 3;
  const std::string js = to_json_string(rep);
  CHECK(js.find("\"check\":\"overlap\"") != std::string::npos);
  CHECK(js.find("\"trials\":100") != std::string::npos);
  CHECK(js.find("\"violated\":false") != std::string::npos);
  CHECK(js.find("\"worst_k\":3") != std::string::npos);
}

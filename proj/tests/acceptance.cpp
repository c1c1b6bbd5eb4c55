// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of hard failures; the hardware-dependent speed-up criterion warns
// instead of failing.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "sparsevr/async.hpp"
#include "sparsevr/fstar.hpp"
#include "sparsevr/harness.hpp"
#include "sparsevr/solvers.hpp"

using namespace sparsevr;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;
int warnings = 0;

void report(int idx, const std::string& name, bool pass,
            const std::string& detail, double seconds, bool soft = false) {
  const char* tag = pass ? "PASS" : (soft ? "WARN" : "FAIL");
  if (!pass && !soft) ++failures;
  if (!pass && soft) ++warnings;
  std::printf("[%2d] %-28s %s  (%.1f s)  %s\n", idx, name.c_str(), tag,
              seconds, detail.c_str());
  std::fflush(stdout);
}

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Problem random_instance(std::int64_t n, std::int64_t d, std::int64_t nnz,
                        double mu, std::uint64_t seed,
                        SmoothnessMode mode = SmoothnessMode::nominal) {
  return make_problem(normalize_rows(gen_random_sparse(n, d, nnz, seed)), mu,
                      mode);
}

double censored(double passes, double budget) {
  return std::isfinite(passes) ? passes : budget;
}

// ---- criteria ----

// Exact unbiasedness of the sparse estimator on >= 5 random instances.
void criterion_1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Problem p = random_instance(200, 50, 10, 1e-3, seed);
    const CheckReport rep = check_unbiasedness(p, 5, seed);
    worst = std::max(worst, rep.max_margin);
    ok = ok && !rep.violated;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max per-coordinate bias %.2e (tol 1e-12)",
                worst);
  report(1, "unbiasedness-exact", ok, buf, elapsed(t0));
}

// Variance bound, 1000 random (y, x~) pairs per instance, enumeration.
void criterion_2() {
  const auto t0 = Clock::now();
  double worst = -1e300;
  bool ok = true;
  for (std::uint64_t seed = 11; seed <= 13; ++seed) {
    const Problem p = random_instance(200, 50, 10, 1e-3, seed);
    const CheckReport rep = check_variance_bound(p, 1000, seed);
    worst = std::max(worst, rep.max_margin);
    ok = ok && !rep.violated;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst margin %.2e (tol 1e-9)", worst);
  report(2, "lemma1-variance-bound", ok, buf, elapsed(t0));
}

// Overlap inequality over >= 1e3 schedules, tau in {1,5,20}, both policies.
void criterion_3() {
  const auto t0 = Clock::now();
  const Problem p = random_instance(40, 20, 5, 1e-2, 21);
  SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0, 64);
  bool ok = true;
  double worst = -1e300;
  for (std::int64_t tau : {1, 5, 20}) {
    for (MaskPolicy policy : {MaskPolicy::all_missing, MaskPolicy::bernoulli}) {
      HarnessConfig cfg;
      cfg.tau = tau;
      cfg.policy = policy;
      cfg.seed = 100 + static_cast<std::uint64_t>(tau);
      const CheckReport rep = check_overlap_bound(p, prm, cfg, 1000);
      ok = ok && !rep.violated;
      worst = std::max(worst, rep.max_margin);
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst margin %.2e (3 SE slack)", worst);
  report(3, "overlap-inequality", ok, buf, elapsed(t0));
}

// Three-scheme equivalence on a fully dense toy dataset.
void criterion_4() {
  const auto t0 = Clock::now();
  auto ds = normalize_rows(gen_random_sparse(1000, 50, 50, 31));
  const Problem p = make_problem(ds, 1e-5);
  const Problem pd = make_problem(std::move(ds), 1e-5, SmoothnessMode::nominal,
                                  RegularizerMode::dense);
  const FStarResult fs = estimate_fstar(p, 4000.0);

  SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0);
  prm.seed = 4242;
  const double pass_budget = 60.0 * 5.0 - 0.5;  // 60 epochs

  SolveOptions sopt;
  sopt.budget.max_passes = pass_budget;
  sopt.fstar = fs.fstar;
  AsyncOptions aopt;
  aopt.budget.max_passes = pass_budget;
  aopt.fstar = fs.fstar;

  const SolverResult serial = ss_acc_svrg(p, prm, sopt);
  const SolverResult async1 = as_acc_svrg_async(p, prm, 1, aopt);
  bool bit_identical = serial.trace.size() == async1.trace.size() &&
                       serial.x == async1.x;
  if (bit_identical)
    for (std::size_t i = 0; i < serial.trace.size(); ++i)
      bit_identical = bit_identical && serial.trace[i].suboptimality ==
                                           async1.trace[i].suboptimality;

  SolveOptions avg = sopt;
  avg.snapshot = SnapshotMode::averaged;
  const SolverResult eager_avg = ss_acc_svrg(pd, prm, avg);
  const SolverResult lagged = lagged_ss_acc_svrg(pd, prm, sopt);
  double lagged_dev = 0.0;
  for (std::size_t i = 0;
       i < std::min(eager_avg.trace.size(), lagged.trace.size()); ++i) {
    const double a = eager_avg.trace[i].suboptimality;
    const double b = lagged.trace[i].suboptimality;
    lagged_dev = std::max(lagged_dev,
                          std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  const bool all_converge = serial.trace.back().suboptimality <= 1e-6 &&
                            async1.trace.back().suboptimality <= 1e-6 &&
                            lagged.trace.back().suboptimality <= 1e-6;

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "serial==async(1): %s; lagged vs eager dev %.2e (tol 1e-8); "
                "all reach 1e-6: %s",
                bit_identical ? "bitwise" : "MISMATCH", lagged_dev,
                all_converge ? "yes" : "no");
  report(4, "three-scheme-equivalence",
         bit_identical && lagged_dev <= 1e-8 && all_converge, buf,
         elapsed(t0));
}

// Sparse-variance-correction ablation: fewer passes with the correction,
// and a wider gap on the sparser dataset.
void criterion_5() {
  const auto t0 = Clock::now();

  auto gap_ratio = [](const Problem& p, double fstar, double budget,
                      double target) {
    SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0);
    SolverParams nocorr = prm;
    nocorr.phi = 0.0;
    SolveOptions opt;
    opt.fstar = fstar;
    opt.budget.max_passes = budget;
    opt.budget.target_subopt = target;
    double with_sum = 0.0, without_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      prm.seed = seed;
      nocorr.seed = seed;
      with_sum += censored(
          passes_to_target(ss_acc_svrg(p, prm, opt).trace, target), budget);
      without_sum += censored(
          passes_to_target(ss_acc_svrg(p, nocorr, opt).trace, target), budget);
    }
    return std::make_pair(with_sum / 10.0, without_sum / 10.0);
  };

  const Problem synth = make_problem(gen_synthetic(10000, 51), 1e-7);
  const FStarResult fs_synth = estimate_fstar(synth, 8000.0);
  const auto [synth_with, synth_without] =
      gap_ratio(synth, fs_synth.fstar, 1500.0, 1e-6);

  const Problem dense01 = random_instance(2000, 200, 20, 1.25e-6, 52);
  const FStarResult fs_dense = estimate_fstar(dense01, 6000.0);
  const auto [dense_with, dense_without] =
      gap_ratio(dense01, fs_dense.fstar, 3000.0, 1e-6);

  const double gap_synth = synth_without / synth_with;
  const double gap_dense = dense_without / dense_with;
  const bool ok = fs_synth.converged && fs_dense.converged &&
                  synth_with < synth_without && gap_synth > gap_dense;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "synthetic (delta=1e-4): %.0f vs %.0f passes (gap %.2fx); "
                "density-0.1: %.0f vs %.0f (gap %.2fx)",
                synth_with, synth_without, gap_synth, dense_with,
                dense_without, gap_dense);
  report(5, "correction-ablation", ok, buf, elapsed(t0));
}

// sqrt(kappa) dependence: 10x smaller mu inflates passes-to-1e-8 by a
// factor in [2, 4.5] for the accelerated solver and >= 6 for sparse SVRG.
void criterion_6() {
  const auto t0 = Clock::now();
  const SparseDataset ds = gen_synthetic(300, 42);
  const Problem p_big_mu = make_problem(ds, 1.25e-6);
  const Problem p_small_mu = make_problem(ds, 1.25e-7);
  const FStarResult fs_big = estimate_fstar(p_big_mu, 30000.0);
  const FStarResult fs_small = estimate_fstar(p_small_mu, 30000.0);

  const double target = 1e-8;
  auto mean_passes = [&](const Problem& p, double fstar, bool accelerated,
                         double budget) {
    SolveOptions opt;
    opt.fstar = fstar;
    opt.budget.max_passes = budget;
    opt.budget.target_subopt = target;
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      SolverResult run;
      if (accelerated) {
        SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0);
        prm.seed = seed;
        run = ss_acc_svrg(p, prm, opt);
      } else {
        run = svrg_serial(p, 0.0, {}, seed, opt);
      }
      sum += censored(passes_to_target(run.trace, target), budget);
    }
    return sum / 10.0;
  };

  const double acc_big = mean_passes(p_big_mu, fs_big.fstar, true, 20000.0);
  const double acc_small =
      mean_passes(p_small_mu, fs_small.fstar, true, 20000.0);
  const double svrg_big = mean_passes(p_big_mu, fs_big.fstar, false, 80000.0);
  const double svrg_small =
      mean_passes(p_small_mu, fs_small.fstar, false, 80000.0);

  const double acc_factor = acc_small / acc_big;
  const double svrg_factor = svrg_small / svrg_big;
  const bool ok = fs_big.converged && fs_small.converged &&
                  acc_factor >= 2.0 && acc_factor <= 4.5 && svrg_factor >= 6.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "accelerated factor %.2f (need [2,4.5]); svrg factor %.2f "
                "(need >= 6)",
                acc_factor, svrg_factor);
  report(6, "sqrt-kappa-dependence", ok, buf, elapsed(t0));
}

// Restart contract at omega = 2: mean per-restart ratio <= 0.8 over 20 seeds.
void criterion_7() {
  const auto t0 = Clock::now();
  const Problem p = make_problem(gen_synthetic(1000, 61), 2.5e-6);
  const FStarResult fs = estimate_fstar(p, 20000.0);
  double ratio_sum = 0.0;
  std::int64_t ratio_count = 0;
  bool all_ran = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 2.0);
    prm.seed = seed;
    prm.R = 4;
    SolveOptions opt;
    opt.fstar = fs.fstar;
    opt.budget.max_passes = 1e9;
    const SolverResult run = ss_acc_svrg(p, prm, opt);
    all_ran = all_ran && run.restart_gaps.size() == 5;
    for (std::size_t r = 1; r < run.restart_gaps.size(); ++r) {
      ratio_sum += run.restart_gaps[r] / run.restart_gaps[r - 1];
      ++ratio_count;
    }
  }
  const double mean_ratio = ratio_sum / static_cast<double>(ratio_count);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "mean per-restart ratio %.4f (need <= 0.8)",
                mean_ratio);
  report(7, "restart-contract", fs.converged && all_ran && mean_ratio <= 0.8,
         buf, elapsed(t0));
}

// Acceleration vs baselines in the ill-conditioned regime.
void criterion_8() {
  const auto t0 = Clock::now();
  const Problem p = make_problem(gen_synthetic(1000, 71), 1e-7);
  const FStarResult fs = estimate_fstar(p, 30000.0);
  const double target = 1e-5;
  const double budget = 50000.0;

  auto mean3 = [&](auto&& runner) {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
      sum += censored(passes_to_target(runner(seed), target), budget);
    return sum / 3.0;
  };

  SolveOptions sopt;
  sopt.fstar = fs.fstar;
  sopt.budget.max_passes = budget;
  sopt.budget.target_subopt = target;
  AsyncOptions aopt;
  aopt.fstar = fs.fstar;
  aopt.budget.max_passes = budget;
  aopt.budget.target_subopt = target;

  const double acc = mean3([&](std::uint64_t seed) {
    SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0);
    prm.seed = seed;
    return ss_acc_svrg(p, prm, sopt).trace;
  });
  const double svrg = mean3([&](std::uint64_t seed) {
    return svrg_serial(p, 0.0, {}, seed, sopt).trace;
  });
  const double saga = mean3([&](std::uint64_t seed) {
    return saga_serial(p, 0.0, seed, sopt).trace;
  });
  const double acc_async = mean3([&](std::uint64_t seed) {
    SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0);
    prm.seed = seed;
    return as_acc_svrg_async(p, prm, 4, aopt).trace;
  });
  const double kromagnon = mean3([&](std::uint64_t seed) {
    return kromagnon_async(p, 0.0, 4, aopt, {}, seed).trace;
  });
  const double asaga = mean3([&](std::uint64_t seed) {
    return asaga_async(p, 0.0, 4, aopt, seed).trace;
  });

  const bool ok = fs.converged && acc < svrg && acc < saga &&
                  acc_async < kromagnon && acc_async < asaga;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "passes to 1e-5: acc %.0f / svrg %.0f / saga %.0f; "
                "async(4): acc %.0f / kromagnon %.0f / asaga %.0f",
                acc, svrg, saga, acc_async, kromagnon, asaga);
  report(8, "acceleration-vs-baselines", ok, buf, elapsed(t0));
}

// Lock-free integrity: exact add counts and no torn reads.
void criterion_9() {
  const auto t0 = Clock::now();
  constexpr int kWorkers = 8;
  constexpr int kAdds = 10000;
  constexpr std::size_t kCoords = 8;
  SharedVector v(kCoords);
  std::vector<std::thread> threads;
  for (int w = 0; w < kWorkers; ++w)
    threads.emplace_back([&v] {
      for (int a = 0; a < kAdds; ++a)
        for (std::size_t c = 0; c < kCoords; ++c) v.add(c, 1.0);
    });
  for (auto& t : threads) t.join();
  bool counts_ok = true;
  for (std::size_t c = 0; c < kCoords; ++c)
    counts_ok = counts_ok && v.load(c) == double(kWorkers * kAdds);

  // Torn-read membership check under concurrent full-word stores.
  const std::vector<double> allowed = {0.0, 1.0, -3.25e107, 5.5e-312};
  SharedVector sv(4);
  std::atomic<bool> stop{false};
  std::atomic<bool> torn{false};
  std::thread writer([&] {
    std::size_t i = 0;
    while (!stop.load(std::memory_order_relaxed)) {
      for (std::size_t c = 0; c < 4; ++c)
        sv.store(c, allowed[(i + c) % allowed.size()]);
      ++i;
    }
  });
  std::thread reader([&] {
    const std::vector<std::int32_t> support = {0, 1, 2, 3};
    std::vector<double> buf(4);
    while (!stop.load(std::memory_order_relaxed)) {
      inconsistent_read(sv, support, buf);
      for (double x : buf) {
        bool member = false;
        for (double a : allowed) member = member || x == a;
        if (!member) torn.store(true);
      }
    }
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(500));
  stop.store(true);
  writer.join();
  reader.join();

  char buf[96];
  std::snprintf(buf, sizeof(buf), "adds exact: %s; torn reads: %s",
                counts_ok ? "yes" : "NO", torn.load() ? "OBSERVED" : "none");
  report(9, "lock-free-integrity", counts_ok && !torn.load(), buf,
         elapsed(t0));
}

// Soft, hardware-dependent: wall-clock speed-up at 4 threads.
void criterion_10() {
  const auto t0 = Clock::now();

  // Calibrate what this machine can give to embarrassingly parallel work.
  auto busy = [](int threads) {
    const auto b0 = Clock::now();
    std::vector<std::thread> ts;
    for (int w = 0; w < threads; ++w)
      ts.emplace_back([] {
        volatile double acc = 0.0;
        for (long i = 0; i < 150000000L; ++i) acc = acc + 1e-9 * double(i);
      });
    for (auto& t : ts) t.join();
    return std::chrono::duration<double>(Clock::now() - b0).count();
  };
  const double ceiling = 4.0 * busy(1) / busy(4);

  const Problem p = random_instance(40000, 2000, 30, 2e-7, 81);
  const FStarResult fs = estimate_fstar(p, 4000.0);
  SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0);
  prm.seed = 7;
  AsyncOptions opt;
  opt.fstar = fs.fstar;
  opt.budget.max_passes = 2000.0;
  opt.budget.target_subopt = 1e-5;

  auto median_time = [&](int workers) {
    std::vector<double> times;
    for (int rep = 0; rep < 3; ++rep) {
      const SolverResult run = as_acc_svrg_async(p, prm, workers, opt);
      times.push_back(seconds_to_target(run.trace, 1e-5));
    }
    std::sort(times.begin(), times.end());
    return times[1];
  };
  const double t1 = median_time(1);
  const double t4 = median_time(4);
  const double speedup = t1 / t4;

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "speedup %.2fx at 4 threads (goal >= 2; delta=%.3f); "
                "machine parallel ceiling %.2fx for plain arithmetic",
                speedup, p.profile.delta, ceiling);
  report(10, "wall-clock-speedup", speedup >= 2.0, buf, elapsed(t0),
         /*soft=*/true);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  std::printf("RESULT: %d hard failure(s), %d warning(s)\n", failures,
              warnings);
  return failures;
}

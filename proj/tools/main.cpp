// sparsevr: dataset prep, solver runs, sweeps, thread-speedup studies and
// verification suites for the sparse variance-reduced solver family.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sparsevr/async.hpp"
#include "sparsevr/dataset.hpp"
#include "sparsevr/fstar.hpp"
#include "sparsevr/harness.hpp"
#include "sparsevr/solvers.hpp"
#include "sparsevr/trace.hpp"

namespace {

using namespace sparsevr;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitVerification = 4;

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string config_file;
  std::string dataset;
  std::int64_t synthetic = 0;
  std::string random_spec;  // NxDxK: n rows, d coords, k nonzeros per row
  std::int64_t d_override = 0;
  bool no_normalize = false;
  double mu = 1e-6;
  std::string solver = "ss-acc-svrg";
  int threads = 1;
  std::uint64_t seed = 0;
  double budget_passes = 100.0;
  double target_subopt = 0.0;  // 0 disables
  double omega = 50.0;
  double tau_tilde = 0.0;
  double step_const = 0.0;  // c in 1/(cL); 0 = solver default
  std::int64_t m = 0;       // 0 = 2n
  std::string smoothness = "nominal";
  std::string fstar_cache = "fstar_cache.txt";
  double fstar_passes = 2000.0;
  std::string out;
};

const std::vector<std::string> kSolvers = {
    "ss-acc-svrg", "ss-acc-svrg-nocorr", "svrg",      "saga",
    "ss-acc-svrg-lu", "katyusha-lu",     "as-acc-svrg", "kromagnon",
    "asaga"};

bool is_async(const std::string& s) {
  return s == "as-acc-svrg" || s == "kromagnon" || s == "asaga";
}
bool is_lagged(const std::string& s) {
  return s == "ss-acc-svrg-lu" || s == "katyusha-lu";
}

void apply_json_config(const std::string& path, CliConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path, 0);
  nlohmann::json j;
  in >> j;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  get("dataset", cfg.dataset);
  get("synthetic", cfg.synthetic);
  get("random", cfg.random_spec);
  get("d-override", cfg.d_override);
  get("no-normalize", cfg.no_normalize);
  get("mu", cfg.mu);
  get("solver", cfg.solver);
  get("threads", cfg.threads);
  get("seed", cfg.seed);
  get("budget-passes", cfg.budget_passes);
  get("target-subopt", cfg.target_subopt);
  get("omega", cfg.omega);
  get("tau-tilde", cfg.tau_tilde);
  get("step-const", cfg.step_const);
  get("m", cfg.m);
  get("smoothness", cfg.smoothness);
  get("fstar-cache", cfg.fstar_cache);
  get("fstar-passes", cfg.fstar_passes);
  get("out", cfg.out);
}

SparseDataset load_dataset(const CliConfig& cfg) {
  int sources = 0;
  sources += !cfg.dataset.empty();
  sources += cfg.synthetic > 0;
  sources += !cfg.random_spec.empty();
  if (sources != 1)
    throw ParseError(
        "exactly one of --dataset, --synthetic, --random is required", 0);

  if (cfg.synthetic > 0) return gen_synthetic(cfg.synthetic, cfg.seed);
  if (!cfg.random_spec.empty()) {
    std::int64_t n = 0, d = 0, k = 0;
    char x1 = 0, x2 = 0;
    std::istringstream ss(cfg.random_spec);
    if (!(ss >> n >> x1 >> d >> x2 >> k) || x1 != 'x' || x2 != 'x' || n < 1 ||
        d < 1 || k < 1)
      throw ParseError("--random expects NxDxK (rows x coords x nnz/row)", 0);
    return gen_random_sparse(n, d, k, cfg.seed);
  }
  // Binary cache or LIBSVM text, sniffed by magic.
  std::ifstream probe(cfg.dataset, std::ios::binary);
  if (!probe) throw ParseError("cannot open " + cfg.dataset, 0);
  char magic[8] = {};
  probe.read(magic, 8);
  probe.close();
  if (std::string_view(magic, 8) == "SVRCACH1") return load_cache(cfg.dataset);
  return load_libsvm(cfg.dataset, cfg.d_override);
}

Problem build_problem(const CliConfig& cfg, SparseDataset ds) {
  if (!cfg.no_normalize) ds = normalize_rows(ds);
  const RegularizerMode reg = is_lagged(cfg.solver)
                                  ? RegularizerMode::dense
                                  : RegularizerMode::sparsified;
  double explicit_l = 0.0;
  SmoothnessMode mode = SmoothnessMode::nominal;
  if (cfg.smoothness == "safe") {
    mode = SmoothnessMode::safe;
  } else if (cfg.smoothness != "nominal") {
    char* end = nullptr;
    explicit_l = std::strtod(cfg.smoothness.c_str(), &end);
    if (end == cfg.smoothness.c_str() || *end != '\0' || explicit_l <= 0.0)
      throw ParseError("--smoothness expects nominal|safe|<value>", 0);
  }
  return make_problem(std::move(ds), cfg.mu, mode, reg, explicit_l);
}

SolverResult dispatch_solver(const CliConfig& cfg, const Problem& p,
                             double fstar) {
  if (std::find(kSolvers.begin(), kSolvers.end(), cfg.solver) ==
      kSolvers.end())
    throw ParseError("unknown solver " + cfg.solver, 0);
  if (cfg.threads < 1) throw ParseError("--threads must be >= 1", 0);
  if (cfg.budget_passes <= 0.0)
    throw ParseError("--budget-passes must be positive", 0);
  if (!is_async(cfg.solver) && cfg.threads > 1)
    std::cerr << "note: " << cfg.solver
              << " is single-threaded; ignoring --threads\n";

  const std::optional<std::int64_t> m =
      cfg.m > 0 ? std::optional<std::int64_t>(cfg.m) : std::nullopt;
  const double step =
      cfg.step_const > 0.0 ? 1.0 / (cfg.step_const * p.L) : 0.0;

  RunBudget budget;
  budget.max_passes = cfg.budget_passes;
  if (cfg.target_subopt > 0.0) budget.target_subopt = cfg.target_subopt;

  if (is_async(cfg.solver)) {
    AsyncOptions opt;
    opt.budget = budget;
    opt.fstar = fstar;
    if (cfg.solver == "kromagnon")
      return kromagnon_async(p, step, cfg.threads, opt, m, cfg.seed);
    if (cfg.solver == "asaga")
      return asaga_async(p, step, cfg.threads, opt, cfg.seed);
    SolverParams prm = derive_params_async(p.n(), p.kappa(), p.L, cfg.omega,
                                           p.profile.delta, cfg.tau_tilde, m);
    prm.seed = cfg.seed;
    return as_acc_svrg_async(p, prm, cfg.threads, opt);
  }

  SolveOptions opt;
  opt.budget = budget;
  opt.fstar = fstar;
  if (cfg.solver == "svrg") return svrg_serial(p, step, m, cfg.seed, opt);
  if (cfg.solver == "saga") return saga_serial(p, step, cfg.seed, opt);
  if (cfg.solver == "katyusha-lu") {
    const KatyushaParams kp =
        derive_katyusha_params(p.n(), p.kappa(), p.L, m, cfg.seed);
    return lagged_katyusha(p, kp, opt);
  }
  SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, cfg.omega, m);
  prm.seed = cfg.seed;
  if (cfg.solver == "ss-acc-svrg-nocorr") prm.phi = 0.0;
  if (cfg.solver == "ss-acc-svrg-lu") return lagged_ss_acc_svrg(p, prm, opt);
  return ss_acc_svrg(p, prm, opt);
}

void print_summary(std::ostream& os, const Trace& trace) {
  const double initial = trace.front().suboptimality;
  for (int dec = 0; dec >= -14; --dec) {
    const double target = std::pow(10.0, dec);
    if (target >= initial) continue;
    const double passes = passes_to_target(trace, target);
    if (!std::isfinite(passes)) break;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "subopt<=1e%+03d  passes=%.2f  time=%.3fs",
                  dec, passes, seconds_to_target(trace, target));
    os << buf << '\n';
  }
  os << "final suboptimality " << trace.back().suboptimality << " after "
     << trace.back().effective_passes << " passes ("
     << trace.back().wall_time_s << " s)\n";
}

double compute_fstar(const CliConfig& cfg, const Problem& p) {
  const FStarResult fs = estimate_fstar(p, cfg.fstar_passes, cfg.fstar_cache);
  if (!fs.warning.empty()) std::cerr << "fstar: " << fs.warning << '\n';
  return fs.fstar;
}

// ---- subcommands ----

int cmd_prep(const CliConfig& cfg, const std::string& cache_out) {
  SparseDataset ds = load_dataset(cfg);
  if (!cfg.no_normalize) ds = normalize_rows(ds);
  auto [compact, prof] = compute_support_profile(ds);
  double min_d = prof.d_diag.empty() ? 0.0 : prof.d_diag[0];
  double max_d = min_d;
  for (double v : prof.d_diag) {
    min_d = std::min(min_d, v);
    max_d = std::max(max_d, v);
  }
  std::cout << "n " << compact.n << "\n"
            << "d " << compact.d << " (original " << prof.original_d << ")\n"
            << "nnz " << compact.nnz() << "\n"
            << "density " << compact.density() << "\n"
            << "delta " << prof.delta << "\n"
            << "D_vv min " << min_d << " max " << max_d << "\n"
            << "hash " << std::hex << dataset_hash(compact) << std::dec
            << "\n";
  if (!cache_out.empty()) {
    save_cache(compact, cache_out);
    std::cout << "cache written to " << cache_out << "\n";
  }
  return kExitOk;
}

int cmd_run(const CliConfig& cfg) {
  const Problem p = build_problem(cfg, load_dataset(cfg));
  const double fstar = compute_fstar(cfg, p);
  const SolverResult res = dispatch_solver(cfg, p, fstar);
  if (cfg.out.empty()) {
    write_trace_csv(std::cout, res.trace);
    print_summary(std::cerr, res.trace);
  } else {
    std::ofstream out(cfg.out);
    if (!out) throw ParseError("cannot write " + cfg.out, 0);
    write_trace_csv(out, res.trace);
    print_summary(std::cout, res.trace);
  }
  if (is_async(cfg.solver) && cfg.threads > 1)
    std::cerr << "observed overlap estimate tau ~ " << res.stats.tau_estimate
              << "\n";
  return kExitOk;
}

int cmd_sweep(const CliConfig& base, const std::string& param,
              const std::vector<double>& values) {
  if (values.empty()) throw ParseError("--values must be nonempty", 0);
  std::ostringstream csv;
  bool first = true;
  for (double v : values) {
    CliConfig cfg = base;
    if (param == "omega")
      cfg.omega = v;
    else if (param == "mu")
      cfg.mu = v;
    else if (param == "tau-tilde")
      cfg.tau_tilde = v;
    else
      throw ParseError("--param must be omega, mu or tau-tilde", 0);
    const Problem p = build_problem(cfg, load_dataset(cfg));
    const double fstar = compute_fstar(cfg, p);
    const SolverResult res = dispatch_solver(cfg, p, fstar);
    write_trace_csv(csv, res.trace, v, first);
    first = false;
    std::cerr << "sweep " << param << "=" << v << ": final subopt "
              << res.trace.back().suboptimality << "\n";
  }
  if (base.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(base.out);
    if (!out) throw ParseError("cannot write " + base.out, 0);
    out << csv.str();
  }
  return kExitOk;
}

int cmd_speedup(const CliConfig& base, std::vector<int> thread_list, int reps) {
  if (!is_async(base.solver))
    throw ParseError("speedup requires an asynchronous solver", 0);
  if (base.target_subopt <= 0.0)
    throw ParseError("speedup requires --target-subopt", 0);
  std::sort(thread_list.begin(), thread_list.end());
  const auto dup = std::unique(thread_list.begin(), thread_list.end());
  if (dup != thread_list.end()) {
    std::cerr << "warning: duplicate thread counts deduplicated\n";
    thread_list.erase(dup, thread_list.end());
  }
  for (int t : thread_list)
    if (t < 1) throw ParseError("thread counts must be >= 1", 0);
  if (thread_list.front() != 1) {
    std::cerr << "note: adding 1 thread as the speed-up baseline\n";
    thread_list.insert(thread_list.begin(), 1);
  }

  const Problem p = build_problem(base, load_dataset(base));
  const double fstar = compute_fstar(base, p);

  // Pre-check: the target must be reachable at one thread.
  {
    CliConfig probe = base;
    probe.threads = 1;
    const SolverResult r = dispatch_solver(probe, p, fstar);
    if (r.trace.back().suboptimality > base.target_subopt)
      throw ParseError(
          "target suboptimality unreachable within the pass budget at 1 "
          "thread; increase --budget-passes",
          0);
  }

  std::vector<double> medians;
  for (int threads : thread_list) {
    std::vector<double> times;
    for (int rep = 0; rep < reps; ++rep) {
      CliConfig cfg = base;
      cfg.threads = threads;
      const SolverResult r = dispatch_solver(cfg, p, fstar);
      times.push_back(seconds_to_target(r.trace, base.target_subopt));
    }
    std::sort(times.begin(), times.end());
    medians.push_back(times[times.size() / 2]);
  }

  std::ostringstream csv;
  csv << "threads,wall_time_s,speedup\n";
  char buf[96];
  for (std::size_t i = 0; i < thread_list.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.4f\n", thread_list[i],
                  medians[i], medians[0] / medians[i]);
    csv << buf;
  }
  if (base.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(base.out);
    if (!out) throw ParseError("cannot write " + base.out, 0);
    out << csv.str();
    std::cout << csv.str();
  }
  return kExitOk;
}

CheckReport verify_equivalence(std::uint64_t seed) {
  // Dense toy: serial vs one async worker must agree bit for bit; the lagged
  // dense variant tracks the eager averaged-snapshot run to 1e-8.
  auto ds = normalize_rows(gen_random_sparse(400, 30, 30, seed));
  const Problem p = make_problem(ds, 1e-4);
  const Problem pd = make_problem(std::move(ds), 1e-4, SmoothnessMode::nominal,
                                  RegularizerMode::dense);
  SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0);
  prm.seed = seed;

  SolveOptions sopt;
  sopt.budget.max_passes = 30;
  AsyncOptions aopt;
  aopt.budget.max_passes = 30;

  CheckReport rep;
  rep.check = "equivalence";
  rep.trials = 3;
  const SolverResult serial = ss_acc_svrg(p, prm, sopt);
  const SolverResult async1 = as_acc_svrg_async(p, prm, 1, aopt);
  for (std::size_t i = 0; i < serial.trace.size(); ++i)
    if (serial.trace[i].suboptimality != async1.trace[i].suboptimality)
      rep.violated = true;

  SolveOptions avg = sopt;
  avg.snapshot = SnapshotMode::averaged;
  const SolverResult eager_avg = ss_acc_svrg(pd, prm, avg);
  const SolverResult lagged = lagged_ss_acc_svrg(pd, prm, sopt);
  double worst = 0.0;
  for (std::size_t i = 0; i < eager_avg.trace.size(); ++i) {
    const double a = eager_avg.trace[i].suboptimality;
    const double b = lagged.trace[i].suboptimality;
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  rep.max_margin = worst;
  if (worst > 1e-8) rep.violated = true;
  return rep;
}

int cmd_verify(const std::string& suite, std::int64_t trials, std::int64_t tau,
               const std::string& policy_name, std::uint64_t seed,
               const std::string& out) {
  MaskPolicy policy = MaskPolicy::all_missing;
  if (policy_name == "bernoulli")
    policy = MaskPolicy::bernoulli;
  else if (policy_name == "none")
    policy = MaskPolicy::none;
  else if (policy_name != "all-missing")
    throw ParseError("--policy must be all-missing, bernoulli or none", 0);

  CheckReport rep;
  if (suite == "unbiased") {
    auto ds = normalize_rows(gen_random_sparse(50, 20, 4, seed));
    rep = check_unbiasedness(make_problem(std::move(ds), 1e-3),
                             std::max<std::int64_t>(5, trials / 10), seed);
  } else if (suite == "variance") {
    auto ds = normalize_rows(gen_random_sparse(60, 24, 5, seed));
    rep =
        check_variance_bound(make_problem(std::move(ds), 1e-2), trials, seed);
  } else if (suite == "overlap") {
    const Problem p = make_problem(gen_synthetic(100, seed), 1e-3);
    SolverParams prm = derive_params_serial(p.n(), p.kappa(), p.L, 50.0, 64);
    HarnessConfig cfg;
    cfg.tau = tau;
    cfg.policy = policy;
    cfg.seed = seed;
    rep = check_overlap_bound(p, prm, cfg, trials);
  } else if (suite == "equivalence") {
    rep = verify_equivalence(seed);
  } else if (suite == "coupling") {
    auto ds = normalize_rows(gen_random_sparse(30, 12, 4, seed));
    const Problem p = make_problem(std::move(ds), 1e-2, SmoothnessMode::safe);
    const FStarResult fs = estimate_fstar(p, 3000.0);
    rep = check_coupling_inequality(p, trials, seed, fs.x_star, fs.fstar);
  } else {
    throw ParseError("unknown verify suite " + suite, 0);
  }

  const std::string js = to_json_string(rep);
  std::cout << js << '\n';
  if (!out.empty()) {
    std::ofstream o(out);
    o << js << '\n';
  }
  if (rep.violated)
    throw VerificationFailure(suite + " violated: worst margin " +
                              std::to_string(rep.max_margin) +
                              " at k=" + std::to_string(rep.worst_k));
  return kExitOk;
}

void add_common_options(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--config", cfg.config_file, "JSON config file");
  cmd->add_option("--dataset", cfg.dataset, "LIBSVM text or binary cache");
  cmd->add_option("--synthetic", cfg.synthetic,
                  "identity design matrix with N random labels");
  cmd->add_option("--random", cfg.random_spec,
                  "random sparse dataset NxDxK (K nonzeros per row)");
  cmd->add_option("--d-override", cfg.d_override, "force coordinate count");
  cmd->add_flag("--no-normalize", cfg.no_normalize, "skip row normalization");
  cmd->add_option("--mu", cfg.mu, "l2 regularization strength");
  cmd->add_option("--seed", cfg.seed, "RNG seed");
  cmd->add_option("--smoothness", cfg.smoothness, "nominal|safe|<value>");
  cmd->add_option("--fstar-cache", cfg.fstar_cache, "f* cache file");
  cmd->add_option("--fstar-passes", cfg.fstar_passes, "f* estimation budget");
  cmd->add_option("--out", cfg.out, "output path (default stdout)");
}

void add_solver_options(CLI::App* cmd, CliConfig& cfg) {
  cmd->add_option("--solver", cfg.solver,
                  "one of: ss-acc-svrg, ss-acc-svrg-nocorr, svrg, saga, "
                  "ss-acc-svrg-lu, katyusha-lu, as-acc-svrg, kromagnon, "
                  "asaga");
  cmd->add_option("--threads", cfg.threads, "worker count (async solvers)");
  cmd->add_option("--budget-passes", cfg.budget_passes, "effective passes");
  cmd->add_option("--target-subopt", cfg.target_subopt,
                  "stop at this suboptimality");
  cmd->add_option("--omega", cfg.omega, "restart frequency constant");
  cmd->add_option("--tau-tilde", cfg.tau_tilde, "overlap estimate");
  cmd->add_option("--step-const", cfg.step_const, "c in step 1/(cL)");
  cmd->add_option("--m", cfg.m, "epoch length (default 2n)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse variance-reduced optimization bench"};
  app.require_subcommand(1);

  CliConfig cfg;
  std::string cache_out, sweep_param, verify_suite, policy = "all-missing";
  std::vector<double> sweep_values;
  std::string thread_list_str = "1,2,4";
  int reps = 3;
  std::int64_t trials = 300, tau = 5;

  CLI::App* prep = app.add_subcommand("prep", "dataset statistics and cache");
  add_common_options(prep, cfg);
  prep->add_option("--cache", cache_out, "write binary cache here");

  CLI::App* run = app.add_subcommand("run", "run one solver, emit CSV trace");
  add_common_options(run, cfg);
  add_solver_options(run, cfg);

  CLI::App* sweep = app.add_subcommand("sweep", "trace per parameter value");
  add_common_options(sweep, cfg);
  add_solver_options(sweep, cfg);
  sweep->add_option("--param", sweep_param, "omega|mu|tau-tilde")->required();
  sweep->add_option("--values", sweep_values, "sweep values")
      ->required()
      ->delimiter(',');

  CLI::App* speedup =
      app.add_subcommand("speedup", "wall-time to target vs thread count");
  add_common_options(speedup, cfg);
  add_solver_options(speedup, cfg);
  speedup->add_option("--thread-list", thread_list_str,
                      "comma-separated thread counts");
  speedup->add_option("--reps", reps, "repetitions per count (median)");

  CLI::App* verify =
      app.add_subcommand("verify", "property suites; exit 4 on violation");
  verify->add_option("suite", verify_suite,
                     "unbiased|variance|overlap|equivalence|coupling")
      ->required();
  verify->add_option("--trials", trials, "Monte-Carlo trials");
  verify->add_option("--tau", tau, "overlap bound tau");
  verify->add_option("--policy", policy, "all-missing|bernoulli|none");
  verify->add_option("--seed", cfg.seed, "RNG seed");
  verify->add_option("--out", cfg.out, "also write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
      return app.exit(e);
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (!cfg.config_file.empty()) {
      // Seed defaults from the JSON file, then let explicit flags win by
      // re-parsing the command line over the merged config.
      CliConfig merged;
      merged.config_file = cfg.config_file;
      apply_json_config(cfg.config_file, merged);
      CLI::App reparse{"reparse"};
      reparse.require_subcommand(1);
      CLI::App* sub = reparse.add_subcommand(
          app.get_subcommands().front()->get_name(), "");
      add_common_options(sub, merged);
      add_solver_options(sub, merged);
      sub->add_option("--cache", cache_out);
      sub->add_option("--param", sweep_param);
      sub->add_option("--values", sweep_values)->delimiter(',');
      sub->add_option("--thread-list", thread_list_str);
      sub->add_option("--reps", reps);
      sub->allow_extras();
      reparse.allow_extras();
      reparse.parse(argc, argv);
      cfg = merged;
    }

    if (prep->parsed()) return cmd_prep(cfg, cache_out);
    if (run->parsed()) return cmd_run(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg, sweep_param, sweep_values);
    if (speedup->parsed()) {
      std::vector<int> counts;
      std::istringstream ss(thread_list_str);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) counts.push_back(std::stoi(tok));
      if (counts.empty())
        throw ParseError("--thread-list produced no counts", 0);
      return cmd_speedup(cfg, counts, reps);
    }
    if (verify->parsed())
      return cmd_verify(verify_suite, trials, tau, policy, cfg.seed, cfg.out);
    return kExitUsage;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kExitVerification;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// fixpoint-vi: solve variational inequalities posed over the common
// fixed-point set of a finite family of nonexpansive maps, verify the
// results against independent oracles, and emit residual traces.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "fixpoint/log.hpp"
#include "fixpoint/problem_io.hpp"

namespace fs = std::filesystem;
using namespace fixpoint;

namespace {

// Exit codes, fixed for scriptability:
// 0 converged / verified, 1 input error, 2 iteration budget exhausted,
// 3 diverged, 4 oracle-unsupported family, 5 verification disagreement.
constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitUnsupported = 4;
constexpr int kExitDisagree = 5;

struct RunFlags {
  std::string out_dir = ".";
  bool emit_iterates = false;
  bool no_timestamp = false;
  std::string scheme = "explicit";
  int jobs = 1;
};

int reason_to_exit(StopReason r) {
  switch (r) {
    case StopReason::residual_met: return kExitOk;
    case StopReason::max_iter: return kExitMaxIter;
    default: return kExitDiverged;
  }
}

RunResult run_problem(const Problem& prob, const RunFlags& flags) {
  RunOptions opts;
  opts.store_iterates = flags.emit_iterates;
  opts.oracle = prob.oracle;
  if (flags.scheme == "halpern") {
    if (prob.family.size() != 1) {
      throw ValidationError("halpern scheme needs a family of exactly one map");
    }
    const auto* anchor = std::get_if<ConstantMap>(&prob.f.payload());
    if (anchor == nullptr) {
      throw ValidationError("halpern scheme takes its anchor from f, which must be of kind "
                            "\"constant\"");
    }
    return run_halpern_traced(prob.family.front(), anchor->u, prob.schedule, prob.start_point(),
                              prob.stopping, opts);
  }
  return run_explicit(prob.scheme_params(), prob.start_point(), prob.stopping, opts);
}

int run_one(const std::string& path, const fs::path& out_dir, const RunFlags& flags) {
  Problem prob = [&] {
    try {
      return load_problem(path);
    } catch (const ParseError& e) {
      throw;  // handled by caller
    }
  }();

  if (flags.scheme != "halpern") {
    ParamReport params = validate_params(prob.scheme_params());
    if (!params.ok) {
      std::cerr << path << ": " << params.issues_joined() << "\n";
      return kExitInput;
    }
    for (const auto& note : params.notes) log_msg(LogLevel::info, path + ": " + note);
  }

  const auto started = std::chrono::steady_clock::now();
  RunResult result = run_problem(prob, flags);
  const auto elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  fs::create_directories(out_dir);
  {
    std::ofstream trace(out_dir / "trace.csv");
    write_trace_csv(trace, result.trace, !flags.no_timestamp, flags.emit_iterates);
  }
  {
    std::ofstream report(out_dir / "report.json");
    report << report_to_json(result.report).dump(2) << "\n";
  }

  std::ostringstream msg;
  msg << path << ": " << to_string(result.report.reason) << " after "
      << result.report.iterations << " iterations (composite residual "
      << format_double(result.report.composite_residual) << ", vi residual "
      << format_double(result.report.vi_residual) << ", " << format_double(elapsed) << " s)";
  log_msg(LogLevel::info, msg.str());

  return reason_to_exit(result.report.reason);
}

int cmd_run(const std::vector<std::string>& paths, const RunFlags& flags) {
  const fs::path base(flags.out_dir);
  const bool nest = paths.size() > 1;

  const auto one = [&](const std::string& p) -> int {
    const fs::path out = nest ? base / fs::path(p).stem() : base;
    try {
      return run_one(p, out, flags);
    } catch (const ParseError& e) {
      std::cerr << e.what() << "\n";
      return kExitInput;
    } catch (const ValidationError& e) {
      std::cerr << p << ": " << e.what() << "\n";
      return kExitInput;
    } catch (const OracleError& e) {
      std::cerr << p << ": " << e.what() << "\n";
      return kExitInput;
    }
  };

  int worst = kExitOk;
  if (flags.jobs > 1 && paths.size() > 1) {
    std::vector<std::future<int>> futures;
    futures.reserve(paths.size());
    for (const auto& p : paths) {
      futures.push_back(std::async(std::launch::async, one, p));
    }
    for (auto& f : futures) worst = std::max(worst, f.get());
  } else {
    for (const auto& p : paths) worst = std::max(worst, one(p));
  }
  return worst;
}

int cmd_verify(const std::string& path, double tol, bool with_implicit_path) {
  Problem prob = load_problem(path);

  auto sets = projection_family(prob.family);
  if (!sets) {
    std::cerr << path << ": the family contains a map the oracle cannot reduce to projections "
              << "(composition or other generic nonexpansive map); verification unsupported\n";
    return kExitUnsupported;
  }

  SchemeParams params = prob.scheme_params();
  ParamReport param_rep = validate_params(params);
  if (!param_rep.ok) {
    std::cerr << path << ": " << param_rep.issues_joined() << "\n";
    return kExitInput;
  }

  RunOptions opts;
  opts.oracle = prob.oracle;
  RunResult run = run_explicit(params, prob.start_point(), prob.stopping, opts);
  const Vector& x_hat = run.report.final_point;

  Vector x_oracle = oracle_vi_solve(*sets, prob.f, prob.a, prob.mu, prob.gamma, prob.oracle);

  const double s = prob.oracle.step.value_or(default_oracle_step(
      prob.mu, prob.gamma, prob.a.strong_monotonicity(), prob.a.lipschitz(), prob.f.alpha()));
  const double dist = (x_hat - x_oracle).norm();
  const double vi_hat = vi_residual(x_hat, *sets, prob.f, prob.a, prob.mu, prob.gamma, s);
  const double vi_oracle = vi_residual(x_oracle, *sets, prob.f, prob.a, prob.mu, prob.gamma, s);

  std::cout << "scheme: " << to_string(run.report.reason) << " after " << run.report.iterations
            << " iterations\n";
  std::cout << "||x_hat - x_oracle|| = " << format_double(dist) << "\n";
  std::cout << "vi residual at x_hat = " << format_double(vi_hat) << "\n";
  std::cout << "vi residual at x_oracle = " << format_double(vi_oracle) << "\n";

  // spot check of the damped-step contraction bound on random pairs
  std::mt19937_64 rng(20240817u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::int64_t> pick_n(1, 1000);
  int passes = 0;
  const int trials = 64;
  double worst_margin = 0.0;
  for (int i = 0; i < trials; ++i) {
    Vector x(prob.dimension), y(prob.dimension);
    for (Index k = 0; k < prob.dimension; ++k) x(k) = 2.0 * gauss(rng);
    for (Index k = 0; k < prob.dimension; ++k) y(k) = 2.0 * gauss(rng);
    BoundReport b = check_step_contraction(params, pick_n(rng), x, y);
    if (b.pass) ++passes;
    worst_margin = std::max(worst_margin, b.lhs - b.rhs);
  }
  std::cout << "step-contraction spot check: " << passes << "/" << trials
            << " pass (worst lhs - rhs = " << format_double(worst_margin) << ")\n";

  if (with_implicit_path) {
    std::vector<NonexpansiveOp> reversed(prob.family.rbegin(), prob.family.rend());
    NonexpansiveOp cycle = compose(std::move(reversed));
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double t : {0.1, 0.01, 0.001}) {
      Vector x_t = implicit_path(cycle, prob.f, prob.a, prob.mu, prob.gamma, t, 1e-10);
      const double d = (x_t - x_hat).norm();
      std::cout << "implicit path t = " << format_double(t)
                << ": ||x_t - x_hat|| = " << format_double(d) << "\n";
      if (d > prev) monotone = false;
      prev = d;
    }
    std::cout << "implicit path monotone decrease: " << (monotone ? "yes" : "no") << "\n";
  }

  const bool agree = dist <= tol;
  std::cout << "verdict: " << (agree ? "AGREE" : "DISAGREE") << " (tol " << format_double(tol)
            << ")\n";
  return agree ? kExitOk : kExitDisagree;
}

int cmd_schedule_check(const std::string& schedule_arg, int family_size, std::int64_t horizon) {
  json j;
  try {
    if (!schedule_arg.empty() && schedule_arg.front() == '@') {
      std::ifstream in(schedule_arg.substr(1));
      if (!in) throw ParseError("cannot open schedule file: " + schedule_arg.substr(1));
      j = json::parse(in);
    } else {
      j = json::parse(schedule_arg);
    }
  } catch (const json::parse_error& e) {
    std::cerr << "schedule: malformed JSON: " << e.what() << "\n";
    return kExitInput;
  }

  Schedule s = schedule_from_json(j);
  ScheduleReport rep = validate(s, family_size, horizon);

  std::cout << "(i)   lim alpha_n = 0: " << to_string(rep.limit_zero)
            << " (alpha at horizon " << rep.horizon_used << " = "
            << format_double(rep.alpha_at_horizon) << ")\n";
  std::cout << "(ii)  sum alpha_n = infinity: " << to_string(rep.divergent_sum) << "\n";
  std::cout << "(iii) lim alpha_n/alpha_{n+N} = 1: " << to_string(rep.cyclic_ratio)
            << " (ratio at horizon = " << format_double(rep.ratio_at_horizon) << ", N = "
            << family_size << ")\n";
  if (!rep.detail.empty()) std::cout << rep.detail << "\n";
  return rep.all_pass() ? kExitOk : kExitMaxIter;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixpoint-vi: variational inequalities over common fixed-point sets of "
               "nonexpansive maps"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "solve a problem file, write trace.csv and report.json");
  std::vector<std::string> run_paths;
  RunFlags flags;
  run->add_option("problems", run_paths, "problem file(s), JSON")->required()->expected(-1);
  run->add_option("-o,--out-dir", flags.out_dir, "output directory (default .)");
  run->add_flag("--emit-iterates", flags.emit_iterates, "include iterate coordinates in the trace");
  run->add_flag("--no-timestamp", flags.no_timestamp,
                "suppress the timestamp header line for byte-reproducible traces");
  run->add_option("--scheme", flags.scheme, "iteration to run: explicit (default) or halpern")
      ->check(CLI::IsMember({"explicit", "halpern"}));
  run->add_option("--jobs", flags.jobs, "run multiple problem files concurrently")
      ->check(CLI::PositiveNumber);

  // verify
  auto* verify =
      app.add_subcommand("verify", "run the scheme and the independent oracle, compare answers");
  std::string verify_path;
  double verify_tol = 1e-3;
  bool verify_implicit = false;
  verify->add_option("problem", verify_path, "problem file, JSON")->required();
  verify->add_option("--tol", verify_tol, "agreement tolerance (default 1e-3)");
  verify->add_flag("--implicit-path", verify_implicit,
                   "also report distances along the implicit path t -> x_t");

  // schedule-check
  auto* sched = app.add_subcommand("schedule-check",
                                   "validate a step-size schedule against the three conditions");
  std::string sched_arg;
  int sched_n = 1;
  std::int64_t sched_horizon = 100000;
  sched->add_option("schedule", sched_arg, "schedule JSON (inline, or @file)")->required();
  sched->add_option("-N,--family-size", sched_n, "cycle length N for condition (iii)");
  sched->add_option("--horizon", sched_horizon, "largest index examined");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_paths, flags);
    if (verify->parsed()) return cmd_verify(verify_path, verify_tol, verify_implicit);
    if (sched->parsed()) return cmd_schedule_check(sched_arg, sched_n, sched_horizon);
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  } catch (const OracleError& e) {
    std::cerr << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

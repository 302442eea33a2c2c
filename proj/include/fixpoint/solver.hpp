#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fixpoint/operators.hpp"
#include "fixpoint/oracle.hpp"
#include "fixpoint/schedules.hpp"

namespace fixpoint {

// ---------------------------------------------------------------------------
// The iteration solved here is
//
//     x_{n+1} = alpha_n * gamma * f(x_n) + (I - alpha_n * mu * A) T_n x_n,
//
// cycling T_n through a finite family of nonexpansive maps. Its limit is the
// unique solution of the variational inequality
//
//     <(gamma*f - mu*A) x', y - x'> <= 0   for all y in the common
//                                           fixed-point set of the family,
//
// provided 0 < mu < 2*eta/k^2, gamma*alpha < tau := mu*(eta - mu*k^2/2), and
// the step sizes satisfy the three schedule conditions. The anchored Halpern
// iteration and the Xu / Marino-Xu / Yamada / Tian schemes are parameter
// specializations, provided as factories below.
// ---------------------------------------------------------------------------

/// Maps step index n >= 1 to a family slot in {1, ..., N}: n = 1 uses the
/// first map, n = N the last, n = N + 1 wraps to the first again.
int cyclic_index(std::int64_t n, int family_size);

/// tau = mu * (eta - mu * k^2 / 2); requires 0 < mu < 2*eta/k^2 so tau > 0.
double compute_tau(double mu, double eta, double k);

struct SchemeParams {
  std::vector<NonexpansiveOp> family;  // T_1, ..., T_N in cycle order
  Contraction f;
  MonotoneOperator a;
  double mu = 1.0;
  double gamma = 0.0;
  Schedule schedule;
};

/// Outcome of validating the scheme hypotheses. Hard issues (mu range, the
/// gamma bound, dimension mismatches) make ok false and refuse a run;
/// schedule verdicts and the fixed-point-set-equality guarantee are soft
/// flags carried into the convergence report.
struct ParamReport {
  bool ok = true;
  double tau = 0.0;
  bool family_firmly_nonexpansive = false;  // guaranteed vs assumed hypothesis
  ScheduleReport schedule;
  std::vector<std::string> issues;  // hard failures
  std::vector<std::string> notes;   // informational (e.g. alpha = 0, gamma = 0)

  std::string issues_joined() const;
};

ParamReport validate_params(const SchemeParams& p, std::int64_t schedule_horizon = 100000);

/// One step of the scheme at index n. Requires validate_params to have
/// passed; only dimensions are re-checked here.
Vector explicit_step(const SchemeParams& p, std::int64_t n, const Vector& x);

/// Both sides of the damped-step contraction bound
/// ||S_n x - S_n y|| <= (1 - alpha_n * tau) ||x - y||, S_n = (I - alpha_n*mu*A) T_n.
struct BoundReport {
  double lhs;
  double rhs;
  bool pass;  // lhs <= rhs + 1e-9
};

BoundReport check_step_contraction(const SchemeParams& p, std::int64_t n, const Vector& x,
                                   const Vector& y);

struct StoppingRule {
  double eps_fix = 1e-6;          // composite fixed-point residual threshold
  double eps_vi = 1e-6;           // VI residual threshold
  std::int64_t max_iter = 1000000;
  std::int64_t check_every = 50;  // VI residual cadence (it needs oracle projections)
};

/// Per-iterate diagnostics. Row n describes iterate x_n:
///   step_residual      ||x_{n+1} - T_n x_n||      (NaN on the terminal row)
///   window_residual    ||x_n - x_{n-N}||          (NaN for n <= N)
///   composite_residual ||x_n - T_{n+N-1} ... T_n x_n||
///   vi_residual        oracle residual at x_n     (NaN between checks)
struct TraceRecord {
  std::int64_t n;
  double alpha;
  double step_residual;
  double window_residual;
  double composite_residual;
  double vi_residual;
  Vector x;  // empty unless iterates were requested
};

struct IterationTrace {
  std::vector<TraceRecord> records;
  bool has_iterates = false;
};

enum class StopReason { residual_met, max_iter, diverged };

std::string to_string(StopReason r);

struct ConvergenceReport {
  Vector final_point;
  std::int64_t iterations = 0;  // index of the final iterate (x_1 is the start)
  StopReason reason = StopReason::max_iter;
  double step_residual = 0.0;
  double window_residual = 0.0;
  double composite_residual = 0.0;
  double vi_residual = 0.0;  // NaN when the oracle is unavailable
  bool vi_oracle_available = false;
  bool family_firmly_nonexpansive = false;  // hypothesis guaranteed vs assumed
  ScheduleReport schedule;
};

struct RunOptions {
  bool store_iterates = false;
  VIOracleParams oracle;
};

struct RunResult {
  ConvergenceReport report;
  IterationTrace trace;
};

/// Runs the cyclic scheme from x0 (taken as x_1). Stops when the composite
/// residual and, when the family reduces to projections, the VI residual both
/// fall below their thresholds; otherwise on budget exhaustion or on the
/// first non-finite iterate (reported as diverged, never thrown).
RunResult run_explicit(const SchemeParams& p, const Vector& x0, const StoppingRule& stop,
                       const RunOptions& opts = {});

/// Anchored iteration x_{n+1} = alpha_n u + (1 - alpha_n) T x_n, converging
/// to the projection of the anchor u onto the fixed-point set of T. The VI
/// stop test uses the equivalent field u - x with unit step, which makes the
/// measured residual exactly the distance to that projection.
ConvergenceReport run_halpern(const NonexpansiveOp& t, const Vector& u, const Schedule& schedule,
                              const Vector& x0, const StoppingRule& stop);

RunResult run_halpern_traced(const NonexpansiveOp& t, const Vector& u, const Schedule& schedule,
                             const Vector& x0, const StoppingRule& stop,
                             const RunOptions& opts = {});

// --- specializations of the scheme ----------------------------------------

/// Xu: x_{n+1} = alpha_n u + (I - alpha_n A) T_n x_n. Constant f folded in
/// with gamma = 1, mu = 1; requires 1 < 2*eta/k^2.
SchemeParams specialize_xu(std::vector<NonexpansiveOp> family, MonotoneOperator a, Vector u,
                           Schedule schedule);

/// Marino-Xu: x_{n+1} = alpha_n gamma f(x_n) + (I - alpha_n A) T x_n (mu = 1).
SchemeParams specialize_marino_xu(NonexpansiveOp t, Contraction f, MonotoneOperator a,
                                  double gamma, Schedule schedule);

/// Yamada: x_{n+1} = (I - alpha_n mu A) T x_n (gamma = 0, the viscosity term
/// vanishes).
SchemeParams specialize_yamada(NonexpansiveOp t, MonotoneOperator a, double mu,
                               Schedule schedule);

/// Tian: x_{n+1} = alpha_n gamma f(x_n) + (I - alpha_n mu A) T x_n, the
/// single-map instance of the cyclic scheme.
SchemeParams specialize_tian(NonexpansiveOp t, Contraction f, MonotoneOperator a, double mu,
                             double gamma, Schedule schedule);

/// Solves x_t = t gamma f(x_t) + (I - t mu A) T x_t by fixed-point iteration;
/// the map contracts with factor 1 - t(tau - gamma*alpha). As t -> 0 the path
/// x_t approaches the VI solution. Terminates when successive iterates differ
/// by less than tol; throws OracleError if the budget runs out (hypothesis
/// violation).
Vector implicit_path(const NonexpansiveOp& t_op, const Contraction& f, const MonotoneOperator& a,
                     double mu, double gamma, double t, double tol,
                     std::int64_t max_iter = 5000000);

}  // namespace fixpoint

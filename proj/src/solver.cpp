#include "fixpoint/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace fixpoint {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBoundSlack = 1e-9;

double composite_residual(const std::vector<NonexpansiveOp>& family, std::int64_t n,
                          const Vector& x) {
  const int n_family = static_cast<int>(family.size());
  Vector z = x;
  for (int j = 0; j < n_family; ++j) {
    z = family[static_cast<std::size_t>(cyclic_index(n + j, n_family) - 1)](z);
  }
  return (x - z).norm();
}

// The one place the step arithmetic lives; every driver and check reuses it
// so that trajectories agree bitwise across entry points.
Vector scheme_step(const SchemeParams& p, double alpha_n, const NonexpansiveOp& t,
                   const Vector& x, Vector* tx_out) {
  Vector tx = t(x);
  const Vector fx = p.f(x);
  const Vector ax = p.a(tx);
  Vector next = tx + (alpha_n * p.gamma) * fx - (alpha_n * p.mu) * ax;
  if (tx_out != nullptr) *tx_out = std::move(tx);
  return next;
}

}  // namespace

int cyclic_index(std::int64_t n, int family_size) {
  if (n < 1) throw ValidationError("cyclic_index: n must be >= 1");
  if (family_size < 1) throw ValidationError("cyclic_index: family size must be >= 1");
  return static_cast<int>((n - 1) % family_size) + 1;
}

double compute_tau(double mu, double eta, double k) {
  if (!(eta > 0.0) || !(k > 0.0)) {
    throw ValidationError("compute_tau: eta and k must be positive");
  }
  if (!(mu > 0.0) || !(mu < 2.0 * eta / (k * k))) {
    throw ValidationError("compute_tau: hypothesis 0 < mu < 2*eta/k^2 violated (mu = " +
                          std::to_string(mu) + ", bound = " + std::to_string(2.0 * eta / (k * k)) +
                          ")");
  }
  return mu * (eta - mu * k * k / 2.0);
}

std::string ParamReport::issues_joined() const {
  std::string out;
  for (const auto& s : issues) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

ParamReport validate_params(const SchemeParams& p, std::int64_t schedule_horizon) {
  ParamReport rep;

  if (p.family.empty()) {
    rep.issues.push_back("operator family is empty");
  } else {
    const Index d = p.family.front().dim();
    for (const auto& t : p.family) {
      if (t.dim() != d) {
        rep.issues.push_back("family members disagree on the ambient dimension");
        break;
      }
    }
    if (p.f.dim() != d) rep.issues.push_back("contraction dimension does not match the family");
    if (p.a.dim() != d) rep.issues.push_back("monotone operator dimension does not match the family");
  }

  const double eta = p.a.strong_monotonicity();
  const double k = p.a.lipschitz();
  if (!(p.mu > 0.0) || !(p.mu < 2.0 * eta / (k * k))) {
    rep.issues.push_back("hypothesis 0 < mu < 2*eta/k^2 violated (mu = " + std::to_string(p.mu) +
                         ", bound = " + std::to_string(2.0 * eta / (k * k)) + ")");
  } else {
    rep.tau = compute_tau(p.mu, eta, k);
  }

  const double alpha = p.f.alpha();
  if (p.gamma < 0.0) {
    rep.issues.push_back("gamma must be nonnegative");
  } else if (rep.tau > 0.0) {
    if (alpha > 0.0) {
      if (!(p.gamma < rep.tau / alpha)) {
        rep.issues.push_back("hypothesis 0 < gamma < tau/alpha violated (gamma = " +
                             std::to_string(p.gamma) + ", tau/alpha = " +
                             std::to_string(rep.tau / alpha) + ")");
      }
    } else {
      rep.notes.push_back("constant contraction (alpha = 0): the gamma bound is vacuous");
    }
    if (p.gamma == 0.0) {
      rep.notes.push_back("gamma = 0: viscosity term disabled (hybrid steepest descent form)");
    }
  }

  if (!p.family.empty()) {
    try {
      rep.schedule = validate(p.schedule, static_cast<int>(p.family.size()), schedule_horizon);
    } catch (const ValidationError& e) {
      rep.issues.push_back(std::string("schedule not validatable: ") + e.what());
    }
    rep.family_firmly_nonexpansive =
        std::all_of(p.family.begin(), p.family.end(),
                    [](const NonexpansiveOp& t) { return t.is_firmly_nonexpansive(); });
    if (!rep.family_firmly_nonexpansive) {
      rep.notes.push_back(
          "family is not certified firmly nonexpansive; the common fixed-point set "
          "equality of cyclic compositions is assumed, not guaranteed");
    }
  }

  rep.ok = rep.issues.empty();
  return rep;
}

Vector explicit_step(const SchemeParams& p, std::int64_t n, const Vector& x) {
  if (p.family.empty()) throw ValidationError("explicit_step: empty family");
  if (x.size() != p.family.front().dim()) throw DimensionError("explicit_step: dimension mismatch");
  if (!is_finite(x)) throw ValidationError("explicit_step: input is not finite");
  const int idx = cyclic_index(n, static_cast<int>(p.family.size()));
  return scheme_step(p, p.schedule.alpha(n), p.family[static_cast<std::size_t>(idx - 1)], x,
                     nullptr);
}

BoundReport check_step_contraction(const SchemeParams& p, std::int64_t n, const Vector& x,
                                   const Vector& y) {
  const double tau = compute_tau(p.mu, p.a.strong_monotonicity(), p.a.lipschitz());
  const double alpha_n = p.schedule.alpha(n);
  const auto& t = p.family[static_cast<std::size_t>(
      cyclic_index(n, static_cast<int>(p.family.size())) - 1)];
  const Vector tx = t(x);
  const Vector ty = t(y);
  const Vector sx = tx - (alpha_n * p.mu) * p.a(tx);
  const Vector sy = ty - (alpha_n * p.mu) * p.a(ty);
  BoundReport rep{};
  rep.lhs = (sx - sy).norm();
  rep.rhs = (1.0 - alpha_n * tau) * (x - y).norm();
  rep.pass = rep.lhs <= rep.rhs + kBoundSlack;
  return rep;
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::residual_met: return "residual-met";
    case StopReason::max_iter: return "max-iter";
    default: return "diverged";
  }
}

RunResult run_explicit(const SchemeParams& p, const Vector& x0, const StoppingRule& stop,
                       const RunOptions& opts) {
  ParamReport params = validate_params(p);
  if (!params.ok) {
    throw ValidationError("run_explicit: " + params.issues_joined());
  }
  if (stop.max_iter < 1 || !(stop.eps_fix > 0.0) || !(stop.eps_vi > 0.0) ||
      stop.check_every < 1) {
    throw ValidationError("run_explicit: stopping rule must have positive tolerances and budget");
  }
  if (p.schedule.horizon_limit() < stop.max_iter) {
    throw ValidationError("run_explicit: explicit schedule provides " +
                          std::to_string(p.schedule.horizon_limit()) +
                          " values but max_iter is " + std::to_string(stop.max_iter));
  }
  const Index d = p.family.front().dim();
  if (x0.size() != d) throw DimensionError("run_explicit: x0 dimension mismatch");
  if (!is_finite(x0)) throw ValidationError("run_explicit: x0 is not finite");

  const int n_family = static_cast<int>(p.family.size());
  auto sets = projection_family(p.family);
  double vi_step = 0.0;
  if (sets) {
    vi_step = opts.oracle.step.value_or(default_oracle_step(
        p.mu, p.gamma, p.a.strong_monotonicity(), p.a.lipschitz(), p.f.alpha()));
  }

  RunResult out;
  out.trace.has_iterates = opts.store_iterates;
  out.trace.records.reserve(static_cast<std::size_t>(
      std::min<std::int64_t>(stop.max_iter + 1, 1 << 20)));
  out.report.vi_oracle_available = sets.has_value();
  out.report.family_firmly_nonexpansive = params.family_firmly_nonexpansive;
  out.report.schedule = params.schedule;

  Vector x = x0;
  std::deque<Vector> history;  // x_{n-N} ... x_{n-1}
  double last_vi = kNaN;
  double last_step = kNaN;
  double last_window = kNaN;

  const auto finalize = [&](std::int64_t n, StopReason reason, Vector point,
                            double composite) -> RunResult {
    out.report.reason = reason;
    out.report.final_point = std::move(point);
    out.report.iterations = n;
    out.report.composite_residual = composite;
    out.report.window_residual = last_window;
    out.report.step_residual = last_step;
    out.report.vi_residual = last_vi;
    return std::move(out);
  };

  for (std::int64_t n = 1;; ++n) {
    TraceRecord row{};
    row.n = n;
    row.alpha = (n <= p.schedule.horizon_limit()) ? p.schedule.alpha(n) : kNaN;
    row.composite_residual = composite_residual(p.family, n, x);
    row.window_residual = (history.size() == static_cast<std::size_t>(n_family))
                              ? (x - history.front()).norm()
                              : kNaN;
    if (!std::isnan(row.window_residual)) last_window = row.window_residual;
    row.step_residual = kNaN;
    row.vi_residual = kNaN;

    bool vi_fresh = false;
    if (sets && (n == 1 || n % stop.check_every == 0 || row.composite_residual <= stop.eps_fix)) {
      row.vi_residual = vi_residual(x, *sets, p.f, p.a, p.mu, p.gamma, vi_step, opts.oracle.tol,
                                    opts.oracle.max_iter);
      last_vi = row.vi_residual;
      vi_fresh = true;
    }

    const bool fix_met = row.composite_residual <= stop.eps_fix;
    const bool vi_met = sets ? (vi_fresh && row.vi_residual <= stop.eps_vi) : true;
    const bool out_of_budget = n > stop.max_iter;

    if ((fix_met && vi_met) || out_of_budget) {
      if (opts.store_iterates) row.x = x;
      const double composite = row.composite_residual;
      out.trace.records.push_back(std::move(row));
      return finalize(n, (fix_met && vi_met) ? StopReason::residual_met : StopReason::max_iter,
                      std::move(x), composite);
    }

    const auto& t = p.family[static_cast<std::size_t>(cyclic_index(n, n_family) - 1)];
    Vector tx;
    Vector x_next = scheme_step(p, row.alpha, t, x, &tx);
    row.step_residual = (x_next - tx).norm();
    last_step = row.step_residual;
    if (opts.store_iterates) row.x = x;
    const double composite = row.composite_residual;
    out.trace.records.push_back(std::move(row));

    if (!is_finite(x_next)) {
      // last finite iterate is the answer on record
      return finalize(n, StopReason::diverged, std::move(x), composite);
    }

    history.push_back(std::move(x));
    if (history.size() > static_cast<std::size_t>(n_family)) history.pop_front();
    x = std::move(x_next);
  }
}

RunResult run_halpern_traced(const NonexpansiveOp& t, const Vector& u, const Schedule& schedule,
                             const Vector& x0, const StoppingRule& stop, const RunOptions& opts) {
  if (u.size() != t.dim() || x0.size() != t.dim()) {
    throw DimensionError("run_halpern: anchor/start dimension mismatch");
  }
  if (stop.max_iter < 1 || !(stop.eps_fix > 0.0) || !(stop.eps_vi > 0.0) ||
      stop.check_every < 1) {
    throw ValidationError("run_halpern: stopping rule must have positive tolerances and budget");
  }
  if (schedule.horizon_limit() < stop.max_iter) {
    throw ValidationError("run_halpern: explicit schedule shorter than max_iter");
  }

  RunResult out;
  out.trace.has_iterates = opts.store_iterates;
  out.report.family_firmly_nonexpansive = t.is_firmly_nonexpansive();
  out.report.schedule = validate(schedule, 1, 100000);

  // The Halpern limit P_{F(T)} u solves the VI with field u - x, so the stop
  // test below measures || x - P_F(x + (u - x)) || = distance to the answer.
  auto sets = projection_family({t});
  out.report.vi_oracle_available = sets.has_value();
  const Contraction anchor_f = Contraction::constant(u);
  const MonotoneOperator identity_a = MonotoneOperator::identity_minus(Vector::Zero(t.dim()));

  Vector x = x0;
  Vector x_prev;
  double last_vi = kNaN;
  double last_step = kNaN;
  double last_window = kNaN;

  const auto finalize = [&](std::int64_t n, StopReason reason, Vector point,
                            double composite) -> RunResult {
    out.report.reason = reason;
    out.report.final_point = std::move(point);
    out.report.iterations = n;
    out.report.composite_residual = composite;
    out.report.window_residual = last_window;
    out.report.step_residual = last_step;
    out.report.vi_residual = last_vi;
    return std::move(out);
  };

  for (std::int64_t n = 1;; ++n) {
    TraceRecord row{};
    row.n = n;
    row.alpha = (n <= schedule.horizon_limit()) ? schedule.alpha(n) : kNaN;
    Vector tx = t(x);
    row.composite_residual = (x - tx).norm();
    row.window_residual = (n > 1) ? (x - x_prev).norm() : kNaN;
    if (!std::isnan(row.window_residual)) last_window = row.window_residual;
    row.step_residual = kNaN;
    row.vi_residual = kNaN;

    bool vi_fresh = false;
    if (sets && (n == 1 || n % stop.check_every == 0 || row.composite_residual <= stop.eps_fix)) {
      row.vi_residual = vi_residual(x, *sets, anchor_f, identity_a, 1.0, 1.0, 1.0,
                                    opts.oracle.tol, opts.oracle.max_iter);
      last_vi = row.vi_residual;
      vi_fresh = true;
    }

    const bool fix_met = row.composite_residual <= stop.eps_fix;
    const bool vi_met = sets ? (vi_fresh && row.vi_residual <= stop.eps_vi) : true;
    const bool out_of_budget = n > stop.max_iter;

    if ((fix_met && vi_met) || out_of_budget) {
      if (opts.store_iterates) row.x = x;
      const double composite = row.composite_residual;
      out.trace.records.push_back(std::move(row));
      return finalize(n, (fix_met && vi_met) ? StopReason::residual_met : StopReason::max_iter,
                      std::move(x), composite);
    }

    Vector x_next = row.alpha * u + (1.0 - row.alpha) * tx;
    row.step_residual = (x_next - tx).norm();
    last_step = row.step_residual;
    if (opts.store_iterates) row.x = x;
    const double composite = row.composite_residual;
    out.trace.records.push_back(std::move(row));

    if (!is_finite(x_next)) {
      return finalize(n, StopReason::diverged, std::move(x), composite);
    }

    x_prev = std::move(x);
    x = std::move(x_next);
  }
}

ConvergenceReport run_halpern(const NonexpansiveOp& t, const Vector& u, const Schedule& schedule,
                              const Vector& x0, const StoppingRule& stop) {
  return run_halpern_traced(t, u, schedule, x0, stop).report;
}

SchemeParams specialize_xu(std::vector<NonexpansiveOp> family, MonotoneOperator a, Vector u,
                           Schedule schedule) {
  compute_tau(1.0, a.strong_monotonicity(), a.lipschitz());  // mu = 1 must be admissible
  Contraction f = Contraction::constant(std::move(u));
  return SchemeParams{std::move(family), std::move(f), std::move(a), 1.0, 1.0,
                      std::move(schedule)};
}

SchemeParams specialize_marino_xu(NonexpansiveOp t, Contraction f, MonotoneOperator a,
                                  double gamma, Schedule schedule) {
  compute_tau(1.0, a.strong_monotonicity(), a.lipschitz());
  std::vector<NonexpansiveOp> family;
  family.push_back(std::move(t));
  return SchemeParams{std::move(family), std::move(f), std::move(a), 1.0, gamma,
                      std::move(schedule)};
}

SchemeParams specialize_yamada(NonexpansiveOp t, MonotoneOperator a, double mu,
                               Schedule schedule) {
  compute_tau(mu, a.strong_monotonicity(), a.lipschitz());
  Contraction f = Contraction::constant(Vector::Zero(t.dim()));  // gamma = 0: never applied
  std::vector<NonexpansiveOp> family;
  family.push_back(std::move(t));
  return SchemeParams{std::move(family), std::move(f), std::move(a), mu, 0.0,
                      std::move(schedule)};
}

SchemeParams specialize_tian(NonexpansiveOp t, Contraction f, MonotoneOperator a, double mu,
                             double gamma, Schedule schedule) {
  compute_tau(mu, a.strong_monotonicity(), a.lipschitz());
  std::vector<NonexpansiveOp> family;
  family.push_back(std::move(t));
  return SchemeParams{std::move(family), std::move(f), std::move(a), mu, gamma,
                      std::move(schedule)};
}

Vector implicit_path(const NonexpansiveOp& t_op, const Contraction& f, const MonotoneOperator& a,
                     double mu, double gamma, double t, double tol, std::int64_t max_iter) {
  if (!(t > 0.0) || !(t < 1.0)) throw ValidationError("implicit_path: t must lie in (0,1)");
  if (!(tol > 0.0)) throw ValidationError("implicit_path: tol must be positive");
  const double tau = compute_tau(mu, a.strong_monotonicity(), a.lipschitz());
  if (gamma < 0.0 || !(gamma * f.alpha() < tau)) {
    throw ValidationError("implicit_path: hypothesis 0 < gamma < tau/alpha violated");
  }
  Vector x = Vector::Zero(t_op.dim());
  for (std::int64_t it = 0; it < max_iter; ++it) {
    const Vector tx = t_op(x);
    Vector next = (t * gamma) * f(x) + tx - (t * mu) * a(tx);
    if (!is_finite(next)) throw OracleError("implicit_path: iterates are not finite");
    const double change = (next - x).norm();
    x = std::move(next);
    if (change < tol) return x;
  }
  throw OracleError("implicit_path: no convergence within " + std::to_string(max_iter) +
                    " iterations (hypotheses violated?)");
}

}  // namespace fixpoint

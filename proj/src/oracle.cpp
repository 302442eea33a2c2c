#include "fixpoint/oracle.hpp"

#include <cmath>
#include <string>

namespace fixpoint {

double default_oracle_step(double mu, double gamma, double eta, double k, double alpha) {
  const double m = mu * eta - gamma * alpha;   // strong monotonicity of mu*A - gamma*f
  const double lip = mu * k + gamma * alpha;   // Lipschitz constant of the same field
  if (!(m > 0.0)) {
    throw ValidationError("oracle step: mu*eta - gamma*alpha must be positive");
  }
  return m / (lip * lip);
}

std::optional<std::vector<NonexpansiveOp>> projection_family(
    const std::vector<NonexpansiveOp>& family) {
  std::vector<NonexpansiveOp> sets;
  for (const auto& op : family) {
    if (op.is_primitive_projection()) {
      sets.push_back(op);
    } else if (std::holds_alternative<IdentityOp>(op.payload())) {
      continue;  // fixed-point set is the whole space
    } else if (const auto* avg = std::get_if<Average>(&op.payload())) {
      auto inner = projection_family({*avg->inner});
      if (!inner) return std::nullopt;
      for (auto& s : *inner) sets.push_back(std::move(s));
    } else {
      return std::nullopt;  // composition or other non-projection map
    }
  }
  return sets;
}

Vector dykstra_project(const std::vector<NonexpansiveOp>& sets, const Vector& y, double tol,
                       std::int64_t max_iter) {
  if (!(tol > 0.0)) throw ValidationError("dykstra_project: tol must be positive");
  if (max_iter < 1) throw ValidationError("dykstra_project: max_iter must be >= 1");
  for (const auto& s : sets) {
    if (!s.is_primitive_projection()) {
      throw ValidationError("dykstra_project: every set must be a primitive projection");
    }
    if (s.dim() != y.size()) throw DimensionError("dykstra_project: dimension mismatch");
  }
  if (sets.empty()) return y;  // intersection of nothing: the whole space

  const std::size_t m = sets.size();
  Vector x = y;
  std::vector<Vector> corrections(m, Vector::Zero(y.size()));

  double displacement = 0.0;
  for (std::int64_t cycle = 0; cycle < max_iter; ++cycle) {
    displacement = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const Vector z = x + corrections[i];
      Vector projected = sets[i](z);
      Vector updated = z - projected;
      displacement += (updated - corrections[i]).squaredNorm();
      corrections[i] = std::move(updated);
      x = std::move(projected);
    }
    if (std::sqrt(displacement) <= tol) return x;
  }
  throw OracleError(
      "dykstra_project: correction displacement " + std::to_string(std::sqrt(displacement)) +
      " did not fall below " + std::to_string(tol) + " within " + std::to_string(max_iter) +
      " cycles; the intersection may be empty");
}

namespace {

Vector vi_field(const Contraction& f, const MonotoneOperator& a, double mu, double gamma,
                const Vector& z) {
  return gamma * f(z) - mu * a(z);
}

double checked_step(const VIOracleParams& params, const Contraction& f,
                    const MonotoneOperator& a, double mu, double gamma) {
  const double m = mu * a.strong_monotonicity() - gamma * f.alpha();
  const double lip = mu * a.lipschitz() + gamma * f.alpha();
  if (!(m > 0.0)) {
    throw ValidationError("oracle_vi_solve: mu*eta - gamma*alpha must be positive");
  }
  const double window = 2.0 * m / (lip * lip);
  const double s = params.step.value_or(m / (lip * lip));
  if (!(s > 0.0) || s >= window) {
    throw ValidationError("oracle_vi_solve: step " + std::to_string(s) +
                          " outside the contraction window (0, " + std::to_string(window) + ")");
  }
  return s;
}

}  // namespace

Vector oracle_vi_solve(const std::vector<NonexpansiveOp>& sets, const Contraction& f,
                       const MonotoneOperator& a, double mu, double gamma,
                       const VIOracleParams& params, std::optional<Vector> start) {
  if (!(params.tol > 0.0)) throw ValidationError("oracle_vi_solve: tol must be positive");
  const double s = checked_step(params, f, a, mu, gamma);
  const double inner_tol = std::min(params.tol * 1e-2, 1e-10);

  Vector z = start ? std::move(*start)
                   : dykstra_project(sets, Vector::Zero(f.dim()), inner_tol, params.max_iter);
  for (std::int64_t it = 0; it < params.max_iter; ++it) {
    Vector next =
        dykstra_project(sets, z + s * vi_field(f, a, mu, gamma, z), inner_tol, params.max_iter);
    const double change = (next - z).norm();
    z = std::move(next);
    if (change < params.tol) return z;
  }
  throw OracleError("oracle_vi_solve: no convergence within " + std::to_string(params.max_iter) +
                    " iterations");
}

double vi_residual(const Vector& x, const std::vector<NonexpansiveOp>& sets,
                   const Contraction& f, const MonotoneOperator& a, double mu, double gamma,
                   double s, double dykstra_tol, std::int64_t dykstra_max_iter) {
  if (!(s > 0.0)) throw ValidationError("vi_residual: s must be positive");
  const Vector target = x + s * vi_field(f, a, mu, gamma, x);
  return (x - dykstra_project(sets, target, dykstra_tol, dykstra_max_iter)).norm();
}

}  // namespace fixpoint

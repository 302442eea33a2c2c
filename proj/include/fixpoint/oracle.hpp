#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fixpoint/operators.hpp"

namespace fixpoint {

/// Thrown when an oracle iteration fails to converge within its budget.
/// For Dykstra this is also the empty-intersection signal: the cyclic
/// correction displacement stops shrinking when the sets do not meet.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Settings for the projected-contraction VI oracle. `step` must lie in the
/// open contraction window (0, 2(mu*eta - gamma*alpha)/(mu*k + gamma*alpha)^2);
/// when absent the midpoint-style default below is used.
struct VIOracleParams {
  std::optional<double> step;
  double tol = 1e-8;
  std::int64_t max_iter = 20000;
};

/// (mu*eta - gamma*alpha) / (mu*k + gamma*alpha)^2, the center of the window.
double default_oracle_step(double mu, double gamma, double eta, double k, double alpha);

/// Reduces a family of nonexpansive maps to the convex sets underlying it:
/// primitive projections contribute their own set, identity contributes
/// nothing, averages unwrap to their inner map (same fixed-point set).
/// Returns nullopt if the family contains a composition or anything else the
/// oracle cannot handle exactly.
std::optional<std::vector<NonexpansiveOp>> projection_family(
    const std::vector<NonexpansiveOp>& family);

/// Projection onto the intersection of the given convex sets via Dykstra's
/// cyclic corrections. Every entry must be a primitive projection; an empty
/// list means the whole space and returns y unchanged. Stops when the cycle's
/// correction displacement falls below tol; throws OracleError when the
/// budget runs out (possible empty intersection).
Vector dykstra_project(const std::vector<NonexpansiveOp>& sets, const Vector& y, double tol,
                       std::int64_t max_iter);

/// Solves the variational inequality <(gamma*f - mu*A) z, y - z> <= 0 for all
/// y in the intersection of `sets`, by iterating z <- P_F(z + s (gamma*f - mu*A) z).
/// The update is a strict contraction whenever mu*eta - gamma*alpha > 0 and s
/// lies in the window, so the fixed point is the unique solution.
Vector oracle_vi_solve(const std::vector<NonexpansiveOp>& sets, const Contraction& f,
                       const MonotoneOperator& a, double mu, double gamma,
                       const VIOracleParams& params, std::optional<Vector> start = {});

/// || x - P_F(x + s (gamma*f - mu*A) x) ||; zero exactly at the VI solution.
double vi_residual(const Vector& x, const std::vector<NonexpansiveOp>& sets,
                   const Contraction& f, const MonotoneOperator& a, double mu, double gamma,
                   double s, double dykstra_tol = 1e-9, std::int64_t dykstra_max_iter = 20000);

}  // namespace fixpoint

// Shared fixtures for the test suites: seeded random operators, generated
// problem instances with a known interior solution, and a brute-force grid
// oracle that is independent of both the solver and the Dykstra machinery
// (feasibility is decided from the raw set data, never through apply()).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "fixpoint/oracle.hpp"
#include "fixpoint/solver.hpp"

namespace testsup {

using namespace fixpoint;

inline Vector random_vector(std::mt19937_64& rng, Index d, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = gauss(rng);
  return v;
}

inline Vector random_unit(std::mt19937_64& rng, Index d) {
  Vector v = random_vector(rng, d);
  while (v.norm() < 1e-8) v = random_vector(rng, d);
  return v / v.norm();
}

/// A random projection whose set contains the closed ball B(anchor, margin),
/// drawn from the fat-interior kinds (halfspace, box, ball).
inline NonexpansiveOp random_fat_projection(std::mt19937_64& rng, const Vector& anchor,
                                            double margin) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Index d = anchor.size();
  switch (kind(rng)) {
    case 0: {  // halfspace <a,x> <= b through anchor + margin slack
      Vector a = random_unit(rng, d);
      const double b = a.dot(anchor) + margin + unif(rng);
      return NonexpansiveOp::halfspace(std::move(a), b);
    }
    case 1: {  // box around the anchor
      Vector lo(d), hi(d);
      for (Index i = 0; i < d; ++i) {
        lo(i) = anchor(i) - margin - unif(rng);
        hi(i) = anchor(i) + margin + unif(rng);
      }
      return NonexpansiveOp::box(std::move(lo), std::move(hi));
    }
    default: {  // ball containing B(anchor, margin)
      Vector center = anchor + random_vector(rng, d, 0.4);
      const double radius = (center - anchor).norm() + margin + unif(rng);
      return NonexpansiveOp::ball(std::move(center), radius);
    }
  }
}

/// Any projection kind, feasible region not necessarily fat (adds hyperplane
/// and affine-subspace cases). Used for operator-catalog property tests.
inline NonexpansiveOp random_projection(std::mt19937_64& rng, Index d) {
  std::uniform_int_distribution<int> kind(0, 4);
  std::uniform_real_distribution<double> unif(0.2, 1.5);
  switch (kind(rng)) {
    case 0:
      return NonexpansiveOp::halfspace(random_unit(rng, d), unif(rng) - 0.5);
    case 1:
      return NonexpansiveOp::hyperplane(random_unit(rng, d), unif(rng) - 0.5);
    case 2:
      return NonexpansiveOp::ball(random_vector(rng, d), unif(rng));
    case 3: {
      Vector lo = random_vector(rng, d);
      Vector hi = lo + Vector::Constant(d, 1.0) * unif(rng);
      return NonexpansiveOp::box(std::move(lo), std::move(hi));
    }
    default: {
      std::uniform_int_distribution<Index> rank(1, std::max<Index>(1, d - 1));
      const Index r = rank(rng);
      std::vector<Vector> basis;
      for (Index i = 0; i < r; ++i) basis.push_back(random_vector(rng, d));
      return NonexpansiveOp::affine_subspace(std::move(basis), random_vector(rng, d));
    }
  }
}

enum class AKind { identity_minus, diagonal, spd };

inline MonotoneOperator random_monotone(std::mt19937_64& rng, Index d, AKind kind,
                                        double max_ratio = 1.2) {
  std::uniform_real_distribution<double> lam(1.0, max_ratio);
  switch (kind) {
    case AKind::identity_minus:
      return MonotoneOperator::identity_minus(random_vector(rng, d));
    case AKind::diagonal: {
      Vector diag(d);
      for (Index i = 0; i < d; ++i) diag(i) = lam(rng);
      return MonotoneOperator::diagonal(std::move(diag));
    }
    default: {
      // Q diag(lambda) Q^T with lambda in [1, max_ratio]
      Matrix g(d, d);
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) g(i, j) = random_vector(rng, 1)(0);
      Eigen::HouseholderQR<Matrix> qr(g);
      Matrix q = qr.householderQ();
      Vector diag(d);
      for (Index i = 0; i < d; ++i) diag(i) = lam(rng);
      Matrix m = q * diag.asDiagonal() * q.transpose();
      m = 0.5 * (m + m.transpose());  // exact symmetry for the constructor
      return MonotoneOperator::spd(std::move(m));
    }
  }
}

/// A generated instance with a known solution: the field gamma*f - mu*A is
/// built to vanish at a point x_star that sits strictly inside every set, so
/// x_star solves the VI and all proof-step diagnostics decay to zero.
struct GeneratedProblem {
  SchemeParams params;
  Vector x0;
  Vector x_star;  // interior common fixed point and VI solution
  std::vector<NonexpansiveOp> sets;
};

inline GeneratedProblem make_interior_problem(std::uint64_t seed, Index d, int n_family,
                                              AKind a_kind, double f_alpha) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Vector x_star(d);
  for (Index i = 0; i < d; ++i) x_star(i) = 2.0 * unif(rng) - 1.0;

  constexpr double kMargin = 0.3;
  std::vector<NonexpansiveOp> sets;
  for (int i = 0; i < n_family; ++i) sets.push_back(random_fat_projection(rng, x_star, kMargin));

  MonotoneOperator a = random_monotone(rng, d, a_kind);
  const double eta = a.strong_monotonicity();
  const double k = a.lipschitz();
  const double mu = (1.2 + 0.4 * unif(rng)) * eta / (k * k);  // well inside (0, 2 eta/k^2)
  const double tau = compute_tau(mu, eta, k);

  const Vector a_at_star = a(x_star);
  double gamma;
  Contraction f = [&]() -> Contraction {
    if (f_alpha == 0.0) {
      gamma = 0.3;
      return Contraction::constant((mu / gamma) * a_at_star);
    }
    gamma = 0.3 * tau / f_alpha;
    // anchor chosen so that gamma * f(x_star) = mu * A(x_star)
    Vector anchor = (mu * a_at_star - gamma * f_alpha * x_star) / (gamma * (1.0 - f_alpha));
    return Contraction::affine_shrink(f_alpha, std::move(anchor));
  }();

  Vector x0 = x_star + (0.3 + 0.9 * unif(rng)) * random_unit(rng, d);

  GeneratedProblem out{SchemeParams{sets, std::move(f), std::move(a), mu, gamma,
                                    Schedule::power(1.0, 1.0)},
                       std::move(x0), std::move(x_star), std::move(sets)};
  return out;
}

// --- brute-force grid oracle -------------------------------------------------

/// Feasibility from the raw set data (independent of the projection code).
/// Supports the fat kinds used by generated instances.
inline bool grid_feasible(const std::vector<NonexpansiveOp>& sets, const Vector& z) {
  for (const auto& s : sets) {
    bool ok = true;
    if (const auto* h = std::get_if<HalfspaceProjection>(&s.payload())) {
      ok = h->a.dot(z) <= h->b + 1e-12;
    } else if (const auto* b = std::get_if<BoxProjection>(&s.payload())) {
      ok = (z.array() >= b->lo.array() - 1e-12).all() &&
           (z.array() <= b->hi.array() + 1e-12).all();
    } else if (const auto* c = std::get_if<BallProjection>(&s.payload())) {
      ok = (z - c->center).norm() <= c->radius + 1e-12;
    } else {
      throw std::logic_error("grid_feasible: unsupported set kind in test fixture");
    }
    if (!ok) return false;
  }
  return true;
}

/// argmin of `objective` over feasible grid points of [lo, hi]^d with the
/// given step. d must be 2 or 3. Throws if no feasible grid point exists.
template <typename Objective>
Vector grid_argmin(const Objective& objective, const std::vector<NonexpansiveOp>& sets,
                   const Vector& lo, const Vector& hi, double step) {
  const Index d = lo.size();
  double best = std::numeric_limits<double>::infinity();
  Vector best_z;
  Vector z(d);
  const auto steps = [&](Index i) {
    return static_cast<std::int64_t>(std::floor((hi(i) - lo(i)) / step)) + 1;
  };
  if (d == 2) {
    const std::int64_t n0 = steps(0), n1 = steps(1);
    for (std::int64_t i = 0; i < n0; ++i) {
      z(0) = lo(0) + static_cast<double>(i) * step;
      for (std::int64_t j = 0; j < n1; ++j) {
        z(1) = lo(1) + static_cast<double>(j) * step;
        if (!grid_feasible(sets, z)) continue;
        const double v = objective(z);
        if (v < best) {
          best = v;
          best_z = z;
        }
      }
    }
  } else if (d == 3) {
    const std::int64_t n0 = steps(0), n1 = steps(1), n2 = steps(2);
    for (std::int64_t i = 0; i < n0; ++i) {
      z(0) = lo(0) + static_cast<double>(i) * step;
      for (std::int64_t j = 0; j < n1; ++j) {
        z(1) = lo(1) + static_cast<double>(j) * step;
        for (std::int64_t l = 0; l < n2; ++l) {
          z(2) = lo(2) + static_cast<double>(l) * step;
          if (!grid_feasible(sets, z)) continue;
          const double v = objective(z);
          if (v < best) {
            best = v;
            best_z = z;
          }
        }
      }
    }
  } else {
    throw std::logic_error("grid_argmin: only d = 2 or 3");
  }
  if (best_z.size() == 0) throw std::logic_error("grid_argmin: no feasible grid point");
  return best_z;
}

/// Two-stage zoom for 3-d instances: coarse scan of the whole window, then a
/// fine scan around the coarse argmin. Widens the refine window and retries
/// if the fine argmin lands on its boundary.
template <typename Objective>
Vector grid_argmin_zoom(const Objective& objective, const std::vector<NonexpansiveOp>& sets,
                        const Vector& lo, const Vector& hi, double coarse_step,
                        double fine_step) {
  Vector center = grid_argmin(objective, sets, lo, hi, coarse_step);
  double half = 5.0 * coarse_step;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Vector flo = center.array() - half;
    Vector fhi = center.array() + half;
    Vector fine = grid_argmin(objective, sets, flo, fhi, fine_step);
    const bool interior =
        ((fine - flo).minCoeff() > fine_step) && ((fhi - fine).minCoeff() > fine_step);
    if (interior) return fine;
    center = fine;
    half *= 2.0;
  }
  throw std::logic_error("grid_argmin_zoom: refinement kept hitting the window boundary");
}

/// The quadratic potential whose gradient is -(gamma*f - mu*A), valid for the
/// affine catalog (constant / affine-shrink f, all A kinds are symmetric).
/// Minimizing it over the feasible set is an independent route to the VI
/// solution.
inline auto vi_potential(const Contraction& f, const MonotoneOperator& a, double mu,
                         double gamma) {
  return [&f, &a, mu, gamma](const Vector& z) -> double {
    // Phi(z) = mu * (<A z, z>/2 adjusted) - gamma * potential of f; assembled
    // from the operator actions so it works for every affine catalog kind:
    // grad Phi = mu*A(z) - gamma*f(z). Integrate along the segment 0 -> z of
    // the affine field: Phi(z) = <z, (mu*A(z) + mu*A(0))/2 - (gamma*f(z) + gamma*f(0))/2>.
    const Vector g1 = mu * a(z) - gamma * f(z);
    const Vector g0 = mu * a(Vector::Zero(z.size())) - gamma * f(Vector::Zero(z.size()));
    return 0.5 * z.dot(g1 + g0);
  };
}

}  // namespace testsup

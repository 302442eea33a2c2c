#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fixpoint/hilbert.hpp"

namespace fixpoint {

// ---------------------------------------------------------------------------
// Nonexpansive operator catalog
//
// Every map T in this catalog satisfies ||Tx - Ty|| <= ||x - y||. The
// projection kinds additionally know the convex set they project onto, which
// is what makes the oracle machinery (Dykstra, VI residuals) possible.
// Operators are immutable after construction and cheap to copy.
// ---------------------------------------------------------------------------

class NonexpansiveOp;

/// Projection onto the halfspace {x : <a,x> <= b}.
struct HalfspaceProjection {
  Vector a;
  double b;
};

/// Projection onto the hyperplane {x : <a,x> = b}.
struct HyperplaneProjection {
  Vector a;
  double b;
};

/// Projection onto the closed ball of given center and radius.
struct BallProjection {
  Vector center;
  double radius;
};

/// Componentwise clamp onto the box [lo, hi].
struct BoxProjection {
  Vector lo;
  Vector hi;
};

/// Projection onto the affine subspace offset + span(basis). The basis is
/// orthonormalized once at construction (modified Gram-Schmidt, rank
/// tolerance 1e-12); the original basis is kept for serialization.
struct AffineProjection {
  std::vector<Vector> basis;
  Vector offset;
  Matrix ortho;  // d x r, orthonormal columns
};

/// Composition applying the rightmost stage first: stages = [S_k, ..., S_1]
/// evaluates S_k(...(S_1(x))).
struct Composition {
  std::vector<NonexpansiveOp> stages;
};

/// Averaged map (1 - theta) * I + theta * inner, theta in (0, 1].
struct Average {
  double theta;
  std::shared_ptr<const NonexpansiveOp> inner;
};

struct IdentityOp {
  Index dim;
};

class NonexpansiveOp {
 public:
  using Payload = std::variant<HalfspaceProjection, HyperplaneProjection, BallProjection,
                               BoxProjection, AffineProjection, Composition, Average, IdentityOp>;

  static NonexpansiveOp halfspace(Vector a, double b);
  static NonexpansiveOp hyperplane(Vector a, double b);
  static NonexpansiveOp ball(Vector center, double radius);
  static NonexpansiveOp box(Vector lo, Vector hi);
  static NonexpansiveOp affine_subspace(std::vector<Vector> basis, Vector offset);
  static NonexpansiveOp average(double theta, NonexpansiveOp inner);
  static NonexpansiveOp identity(Index dim);

  Vector operator()(const Vector& x) const;

  Index dim() const;
  std::string kind_name() const;

  /// True for the five projection kinds (the maps whose target set the
  /// oracle can project onto directly).
  bool is_primitive_projection() const;

  /// Structurally certified firm nonexpansiveness: projections, identity,
  /// and averages of such. Compositions are excluded: a product of firmly
  /// nonexpansive maps need not be firmly nonexpansive.
  bool is_firmly_nonexpansive() const;

  const Payload& payload() const { return payload_; }

  friend NonexpansiveOp compose(std::vector<NonexpansiveOp> ops);

 private:
  explicit NonexpansiveOp(Payload p) : payload_(std::move(p)) {}
  Payload payload_;
};

/// Composition in product order: ops = [T_N, ..., T_1] applies T_1 first.
/// A single-element list returns that element unchanged.
NonexpansiveOp compose(std::vector<NonexpansiveOp> ops);

/// ||T(x) - x|| <= tol, the computational membership test for F(T).
bool fixed_point_set_membership(const NonexpansiveOp& op, const Vector& x, double tol);

// ---------------------------------------------------------------------------
// Contractions f with certified constant alpha in [0, 1)
// ---------------------------------------------------------------------------

struct ConstantMap {
  Vector u;
};

/// f(x) = c * (x - anchor) + anchor with c in [0, 1).
struct AffineShrink {
  double c;
  Vector anchor;
};

/// f(x) = M x with spectral norm certified < 1 at construction.
struct LinearContraction {
  Matrix m;
  double op_norm;
};

class Contraction {
 public:
  using Payload = std::variant<ConstantMap, AffineShrink, LinearContraction>;

  static Contraction constant(Vector u);
  static Contraction affine_shrink(double c, Vector anchor);
  static Contraction linear(Matrix m);

  Vector operator()(const Vector& x) const;
  double alpha() const { return alpha_; }
  Index dim() const;
  std::string kind_name() const;
  const Payload& payload() const { return payload_; }

 private:
  Contraction(Payload p, double alpha) : payload_(std::move(p)), alpha_(alpha) {}
  Payload payload_;
  double alpha_;
};

// ---------------------------------------------------------------------------
// k-Lipschitz, eta-strongly monotone operators A
// ---------------------------------------------------------------------------

struct IdentityMinus {
  Vector b;
};

struct SpdMatrix {
  Matrix m;
};

struct DiagonalScaling {
  Vector d;
};

class MonotoneOperator {
 public:
  using Payload = std::variant<IdentityMinus, SpdMatrix, DiagonalScaling>;

  /// A(x) = x - b; k = eta = 1.
  static MonotoneOperator identity_minus(Vector b);

  /// A(x) = M x for symmetric positive definite M; by default k and eta are
  /// the extreme eigenvalues. Declared overrides (looser or deliberately
  /// wrong constants) are accepted as long as 0 < eta <= k; certify_constants
  /// is the empirical check against them.
  static MonotoneOperator spd(Matrix m, std::optional<double> k = {},
                              std::optional<double> eta = {});

  /// A(x) = d .* x with d_i > 0; k = max d, eta = min d unless overridden.
  static MonotoneOperator diagonal(Vector d, std::optional<double> k = {},
                                   std::optional<double> eta = {});

  static MonotoneOperator identity_minus_declared(Vector b, double k, double eta);

  Vector operator()(const Vector& x) const;
  double lipschitz() const { return k_; }           // k
  double strong_monotonicity() const { return eta_; }  // eta
  Index dim() const;
  std::string kind_name() const;
  const Payload& payload() const { return payload_; }

 private:
  MonotoneOperator(Payload p, double k, double eta)
      : payload_(std::move(p)), k_(k), eta_(eta) {}
  Payload payload_;
  double k_;
  double eta_;
};

// ---------------------------------------------------------------------------
// Empirical certification of declared constants
// ---------------------------------------------------------------------------

/// Worst observed ratios over random sample pairs, compared against the
/// declared constants with 1e-7 relative slack.
struct ContractionCertificate {
  double declared_alpha;
  double worst_ratio;  // max ||f(x)-f(y)|| / ||x-y||
  std::int64_t samples;
  bool violation;
};

struct MonotoneCertificate {
  double declared_k;
  double declared_eta;
  double worst_lipschitz_ratio;     // max ||Ax-Ay|| / ||x-y||, must stay <= k
  double worst_monotonicity_ratio;  // min <x-y, Ax-Ay> / ||x-y||^2, must stay >= eta
  std::int64_t samples;
  bool violation;
};

ContractionCertificate certify_constants(const Contraction& f, std::int64_t samples,
                                         std::uint64_t seed);
MonotoneCertificate certify_constants(const MonotoneOperator& a, std::int64_t samples,
                                      std::uint64_t seed);

}  // namespace fixpoint

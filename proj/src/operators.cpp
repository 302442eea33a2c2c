#include "fixpoint/operators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fixpoint {

namespace {

constexpr double kRankTol = 1e-12;

Matrix orthonormalize(const std::vector<Vector>& basis, Index dim) {
  Matrix q(dim, static_cast<Index>(basis.size()));
  Index r = 0;
  for (const Vector& v : basis) {
    if (v.size() != dim) throw DimensionError("affine_subspace: basis vector dimension mismatch");
    Vector w = v;
    // two Gram-Schmidt sweeps; the second mops up cancellation
    for (int sweep = 0; sweep < 2; ++sweep) {
      if (r > 0) w -= q.leftCols(r) * (q.leftCols(r).transpose() * w);
    }
    const double wn = w.norm();
    if (wn > kRankTol * std::max(1.0, v.norm())) {
      q.col(r) = w / wn;
      ++r;
    }
  }
  return q.leftCols(r);
}

}  // namespace

NonexpansiveOp NonexpansiveOp::halfspace(Vector a, double b) {
  if (a.size() < 1 || a.norm() == 0.0) throw ValidationError("halfspace: normal must be nonzero");
  return NonexpansiveOp(HalfspaceProjection{std::move(a), b});
}

NonexpansiveOp NonexpansiveOp::hyperplane(Vector a, double b) {
  if (a.size() < 1 || a.norm() == 0.0) throw ValidationError("hyperplane: normal must be nonzero");
  return NonexpansiveOp(HyperplaneProjection{std::move(a), b});
}

NonexpansiveOp NonexpansiveOp::ball(Vector center, double radius) {
  if (!(radius > 0.0)) throw ValidationError("ball: radius must be positive");
  if (center.size() < 1) throw ValidationError("ball: empty center");
  return NonexpansiveOp(BallProjection{std::move(center), radius});
}

NonexpansiveOp NonexpansiveOp::box(Vector lo, Vector hi) {
  require_same_dim(lo, hi, "box");
  if (lo.size() < 1) throw ValidationError("box: empty bounds");
  if ((lo.array() > hi.array()).any()) throw ValidationError("box: requires lo <= hi componentwise");
  return NonexpansiveOp(BoxProjection{std::move(lo), std::move(hi)});
}

NonexpansiveOp NonexpansiveOp::affine_subspace(std::vector<Vector> basis, Vector offset) {
  if (offset.size() < 1) throw ValidationError("affine_subspace: empty offset");
  Matrix q = orthonormalize(basis, offset.size());
  return NonexpansiveOp(AffineProjection{std::move(basis), std::move(offset), std::move(q)});
}

NonexpansiveOp NonexpansiveOp::average(double theta, NonexpansiveOp inner) {
  if (!(theta > 0.0) || theta > 1.0) throw ValidationError("average: theta must lie in (0,1]");
  return NonexpansiveOp(Average{theta, std::make_shared<const NonexpansiveOp>(std::move(inner))});
}

NonexpansiveOp NonexpansiveOp::identity(Index dim) {
  if (dim < 1) throw ValidationError("identity: dimension must be >= 1");
  return NonexpansiveOp(IdentityOp{dim});
}

NonexpansiveOp compose(std::vector<NonexpansiveOp> ops) {
  if (ops.empty()) throw ValidationError("compose: empty operator list");
  const Index d = ops.front().dim();
  for (const auto& op : ops) {
    if (op.dim() != d) throw DimensionError("compose: mixed ambient dimensions");
  }
  if (ops.size() == 1) return std::move(ops.front());
  return NonexpansiveOp(Composition{std::move(ops)});
}

Vector NonexpansiveOp::operator()(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("NonexpansiveOp: input dimension mismatch");
  return std::visit(
      [&x](const auto& op) -> Vector {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, HalfspaceProjection>) {
          const double s = op.a.dot(x) - op.b;
          if (s <= 0.0) return x;
          return x - (s / op.a.squaredNorm()) * op.a;
        } else if constexpr (std::is_same_v<T, HyperplaneProjection>) {
          return x - ((op.a.dot(x) - op.b) / op.a.squaredNorm()) * op.a;
        } else if constexpr (std::is_same_v<T, BallProjection>) {
          const Vector r = x - op.center;
          const double n = r.norm();
          if (n <= op.radius) return x;
          return op.center + (op.radius / n) * r;
        } else if constexpr (std::is_same_v<T, BoxProjection>) {
          return x.cwiseMax(op.lo).cwiseMin(op.hi);
        } else if constexpr (std::is_same_v<T, AffineProjection>) {
          if (op.ortho.cols() == 0) return op.offset;
          return op.offset + op.ortho * (op.ortho.transpose() * (x - op.offset));
        } else if constexpr (std::is_same_v<T, Composition>) {
          Vector y = x;
          for (auto it = op.stages.rbegin(); it != op.stages.rend(); ++it) y = (*it)(y);
          return y;
        } else if constexpr (std::is_same_v<T, Average>) {
          return (1.0 - op.theta) * x + op.theta * (*op.inner)(x);
        } else {
          return x;  // IdentityOp
        }
      },
      payload_);
}

Index NonexpansiveOp::dim() const {
  return std::visit(
      [](const auto& op) -> Index {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, HalfspaceProjection>) return op.a.size();
        else if constexpr (std::is_same_v<T, HyperplaneProjection>) return op.a.size();
        else if constexpr (std::is_same_v<T, BallProjection>) return op.center.size();
        else if constexpr (std::is_same_v<T, BoxProjection>) return op.lo.size();
        else if constexpr (std::is_same_v<T, AffineProjection>) return op.offset.size();
        else if constexpr (std::is_same_v<T, Composition>) return op.stages.front().dim();
        else if constexpr (std::is_same_v<T, Average>) return op.inner->dim();
        else return op.dim;
      },
      payload_);
}

std::string NonexpansiveOp::kind_name() const {
  return std::visit(
      [](const auto& op) -> std::string {
        using T = std::decay_t<decltype(op)>;
        (void)op;
        if constexpr (std::is_same_v<T, HalfspaceProjection>) return "halfspace";
        else if constexpr (std::is_same_v<T, HyperplaneProjection>) return "hyperplane";
        else if constexpr (std::is_same_v<T, BallProjection>) return "ball";
        else if constexpr (std::is_same_v<T, BoxProjection>) return "box";
        else if constexpr (std::is_same_v<T, AffineProjection>) return "affine";
        else if constexpr (std::is_same_v<T, Composition>) return "composition";
        else if constexpr (std::is_same_v<T, Average>) return "average";
        else return "identity";
      },
      payload_);
}

bool NonexpansiveOp::is_primitive_projection() const {
  return std::visit(
      [](const auto& op) -> bool {
        using T = std::decay_t<decltype(op)>;
        (void)op;
        return std::is_same_v<T, HalfspaceProjection> || std::is_same_v<T, HyperplaneProjection> ||
               std::is_same_v<T, BallProjection> || std::is_same_v<T, BoxProjection> ||
               std::is_same_v<T, AffineProjection>;
      },
      payload_);
}

bool NonexpansiveOp::is_firmly_nonexpansive() const {
  if (is_primitive_projection()) return true;
  if (std::holds_alternative<IdentityOp>(payload_)) return true;
  if (const auto* avg = std::get_if<Average>(&payload_)) return avg->inner->is_firmly_nonexpansive();
  return false;
}

bool fixed_point_set_membership(const NonexpansiveOp& op, const Vector& x, double tol) {
  if (!(tol > 0.0)) throw ValidationError("fixed_point_set_membership: tol must be positive");
  return (op(x) - x).norm() <= tol;
}

// --- Contraction -----------------------------------------------------------

Contraction Contraction::constant(Vector u) {
  if (u.size() < 1) throw ValidationError("constant: empty vector");
  return Contraction(ConstantMap{std::move(u)}, 0.0);
}

Contraction Contraction::affine_shrink(double c, Vector anchor) {
  if (!(c >= 0.0) || c >= 1.0) throw ValidationError("affine_shrink: c must lie in [0,1)");
  if (anchor.size() < 1) throw ValidationError("affine_shrink: empty anchor");
  return Contraction(AffineShrink{c, std::move(anchor)}, c);
}

Contraction Contraction::linear(Matrix m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw ValidationError("linear: matrix must be square");
  const double op_norm = m.jacobiSvd().singularValues()(0);
  if (!(op_norm < 1.0)) {
    throw ValidationError("linear: operator norm " + std::to_string(op_norm) +
                          " is not a contraction (need < 1)");
  }
  return Contraction(LinearContraction{std::move(m), op_norm}, op_norm);
}

Vector Contraction::operator()(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("Contraction: input dimension mismatch");
  return std::visit(
      [&x](const auto& f) -> Vector {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantMap>) return f.u;
        else if constexpr (std::is_same_v<T, AffineShrink>) return f.anchor + f.c * (x - f.anchor);
        else return f.m * x;
      },
      payload_);
}

Index Contraction::dim() const {
  return std::visit(
      [](const auto& f) -> Index {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantMap>) return f.u.size();
        else if constexpr (std::is_same_v<T, AffineShrink>) return f.anchor.size();
        else return f.m.rows();
      },
      payload_);
}

std::string Contraction::kind_name() const {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        (void)f;
        if constexpr (std::is_same_v<T, ConstantMap>) return "constant";
        else if constexpr (std::is_same_v<T, AffineShrink>) return "affine-shrink";
        else return "linear";
      },
      payload_);
}

// --- MonotoneOperator ------------------------------------------------------

namespace {

void check_declared(double k, double eta) {
  if (!(eta > 0.0) || !(k > 0.0)) throw ValidationError("monotone operator: k, eta must be > 0");
  if (eta > k) throw ValidationError("monotone operator: eta <= k is forced by Cauchy-Schwarz");
}

}  // namespace

MonotoneOperator MonotoneOperator::identity_minus(Vector b) {
  if (b.size() < 1) throw ValidationError("identity_minus: empty shift");
  return MonotoneOperator(IdentityMinus{std::move(b)}, 1.0, 1.0);
}

MonotoneOperator MonotoneOperator::identity_minus_declared(Vector b, double k, double eta) {
  check_declared(k, eta);
  if (b.size() < 1) throw ValidationError("identity_minus: empty shift");
  return MonotoneOperator(IdentityMinus{std::move(b)}, k, eta);
}

MonotoneOperator MonotoneOperator::spd(Matrix m, std::optional<double> k,
                                       std::optional<double> eta) {
  if (m.rows() != m.cols() || m.rows() < 1) throw ValidationError("spd: matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > 1e-9 * scale) {
    throw ValidationError("spd: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw ValidationError("spd: matrix is not positive definite");
  const double kk = k.value_or(hi);
  const double ee = eta.value_or(lo);
  check_declared(kk, ee);
  return MonotoneOperator(SpdMatrix{std::move(m)}, kk, ee);
}

MonotoneOperator MonotoneOperator::diagonal(Vector d, std::optional<double> k,
                                            std::optional<double> eta) {
  if (d.size() < 1) throw ValidationError("diagonal: empty diagonal");
  if (!(d.minCoeff() > 0.0)) throw ValidationError("diagonal: entries must be positive");
  const double kk = k.value_or(d.maxCoeff());
  const double ee = eta.value_or(d.minCoeff());
  check_declared(kk, ee);
  return MonotoneOperator(DiagonalScaling{std::move(d)}, kk, ee);
}

Vector MonotoneOperator::operator()(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("MonotoneOperator: input dimension mismatch");
  return std::visit(
      [&x](const auto& a) -> Vector {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, IdentityMinus>) return x - a.b;
        else if constexpr (std::is_same_v<T, SpdMatrix>) return a.m * x;
        else return a.d.cwiseProduct(x);
      },
      payload_);
}

Index MonotoneOperator::dim() const {
  return std::visit(
      [](const auto& a) -> Index {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, IdentityMinus>) return a.b.size();
        else if constexpr (std::is_same_v<T, SpdMatrix>) return a.m.rows();
        else return a.d.size();
      },
      payload_);
}

std::string MonotoneOperator::kind_name() const {
  return std::visit(
      [](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        (void)a;
        if constexpr (std::is_same_v<T, IdentityMinus>) return "identity-minus";
        else if constexpr (std::is_same_v<T, SpdMatrix>) return "spd";
        else return "diagonal";
      },
      payload_);
}

// --- certification ---------------------------------------------------------

namespace {

constexpr double kCertifySlack = 1e-7;  // relative

std::pair<Vector, Vector> random_pair(std::mt19937_64& rng, Index dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector x(dim), y(dim);
  for (Index i = 0; i < dim; ++i) x(i) = gauss(rng);
  for (Index i = 0; i < dim; ++i) y(i) = gauss(rng);
  return {std::move(x), std::move(y)};
}

}  // namespace

ContractionCertificate certify_constants(const Contraction& f, std::int64_t samples,
                                         std::uint64_t seed) {
  if (samples < 1) throw ValidationError("certify_constants: samples must be >= 1");
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    auto [x, y] = random_pair(rng, f.dim());
    const double dxy = (x - y).norm();
    if (dxy == 0.0) continue;
    worst = std::max(worst, (f(x) - f(y)).norm() / dxy);
  }
  const bool violation = worst > f.alpha() + kCertifySlack * std::max(1.0, f.alpha());
  return ContractionCertificate{f.alpha(), worst, samples, violation};
}

MonotoneCertificate certify_constants(const MonotoneOperator& a, std::int64_t samples,
                                      std::uint64_t seed) {
  if (samples < 1) throw ValidationError("certify_constants: samples must be >= 1");
  std::mt19937_64 rng(seed);
  double worst_lip = 0.0;
  double worst_mono = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < samples; ++i) {
    auto [x, y] = random_pair(rng, a.dim());
    const Vector dx = x - y;
    const double d2 = dx.squaredNorm();
    if (d2 == 0.0) continue;
    const Vector da = a(x) - a(y);
    worst_lip = std::max(worst_lip, da.norm() / std::sqrt(d2));
    worst_mono = std::min(worst_mono, dx.dot(da) / d2);
  }
  const double k = a.lipschitz();
  const double eta = a.strong_monotonicity();
  const bool violation = worst_lip > k + kCertifySlack * std::max(1.0, k) ||
                         worst_mono < eta - kCertifySlack * std::max(1.0, eta);
  return MonotoneCertificate{k, eta, worst_lip, worst_mono, samples, violation};
}

}  // namespace fixpoint

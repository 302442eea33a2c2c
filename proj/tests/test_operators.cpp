#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

using namespace fixpoint;
using testsup::random_projection;
using testsup::random_vector;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::vector<NonexpansiveOp> catalog_samples(std::mt19937_64& rng, Index d) {
  std::vector<NonexpansiveOp> ops;
  for (int i = 0; i < 10; ++i) ops.push_back(random_projection(rng, d));
  ops.push_back(NonexpansiveOp::identity(d));
  ops.push_back(NonexpansiveOp::average(0.5, random_projection(rng, d)));
  ops.push_back(compose({random_projection(rng, d), random_projection(rng, d)}));
  return ops;
}

}  // namespace

TEST_CASE("projection closed forms") {
  auto half = NonexpansiveOp::halfspace(vec2(1, 0), 0.0);
  CHECK(half(vec2(-2, 3)) == vec2(-2, 3));  // already feasible
  CHECK(half(vec2(2, 3)) == vec2(0, 3));

  auto ball = NonexpansiveOp::ball(Vector::Zero(2), 1.0);
  CHECK((ball(vec2(3, 4)) - vec2(0.6, 0.8)).norm() < 1e-15);

  auto box = NonexpansiveOp::box(Vector::Zero(2), Vector::Ones(2));
  CHECK(box(vec2(2, -1)) == vec2(1, 0));

  auto plane = NonexpansiveOp::hyperplane(vec2(1, 1), 1.0);
  CHECK((plane(vec2(1, 1)) - vec2(0.5, 0.5)).norm() < 1e-15);

  // line {(t, 1)}: basis (1,0), offset (0,1)
  auto line = NonexpansiveOp::affine_subspace({vec2(1, 0)}, vec2(0, 1));
  CHECK((line(vec2(2, 3)) - vec2(2, 1)).norm() < 1e-15);
}

TEST_CASE("affine projection handles rank-deficient bases") {
  // duplicate direction: still the same line
  auto line = NonexpansiveOp::affine_subspace({vec2(1, 1), vec2(2, 2)}, Vector::Zero(2));
  Vector p = line(vec2(3, 1));
  CHECK((p - vec2(2, 2)).norm() < 1e-12);

  // empty basis: projection onto the single point {offset}
  auto point = NonexpansiveOp::affine_subspace({}, vec2(4, -1));
  CHECK(point(vec2(100, 100)) == vec2(4, -1));
}

TEST_CASE("construction rejects invalid data") {
  CHECK_THROWS_AS(NonexpansiveOp::halfspace(Vector::Zero(2), 1.0), ValidationError);
  CHECK_THROWS_AS(NonexpansiveOp::ball(Vector::Zero(2), 0.0), ValidationError);
  CHECK_THROWS_AS(NonexpansiveOp::box(Vector::Ones(2), Vector::Zero(2)), ValidationError);
  CHECK_THROWS_AS(NonexpansiveOp::average(0.0, NonexpansiveOp::identity(2)), ValidationError);
  CHECK_THROWS_AS(NonexpansiveOp::average(1.5, NonexpansiveOp::identity(2)), ValidationError);
  CHECK_THROWS_AS(compose({}), ValidationError);
  CHECK_THROWS_AS(compose({NonexpansiveOp::identity(2), NonexpansiveOp::identity(3)}),
                  DimensionError);
  CHECK_THROWS_AS(NonexpansiveOp::identity(2)(Vector::Zero(3)), DimensionError);

  CHECK_THROWS_AS(Contraction::affine_shrink(1.0, Vector::Zero(2)), ValidationError);
  CHECK_THROWS_AS(Contraction::affine_shrink(-0.1, Vector::Zero(2)), ValidationError);
  CHECK_THROWS_AS(Contraction::linear(Matrix::Identity(2, 2)), ValidationError);

  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(MonotoneOperator::spd(asym), ValidationError);
  Matrix indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(MonotoneOperator::spd(indef), ValidationError);
  CHECK_THROWS_AS(MonotoneOperator::diagonal(vec2(1, 0)), ValidationError);
  CHECK_THROWS_AS(MonotoneOperator::identity_minus_declared(Vector::Zero(2), 1.0, 2.0),
                  ValidationError);  // eta > k
}

TEST_CASE("fixed point set membership") {
  std::mt19937_64 rng(7);
  auto id = NonexpansiveOp::identity(3);
  CHECK(fixed_point_set_membership(id, random_vector(rng, 3), 1e-12));

  auto half = NonexpansiveOp::halfspace(vec2(1, 0), 0.0);
  CHECK(fixed_point_set_membership(half, vec2(-1, 0), 1e-12));
  CHECK_FALSE(fixed_point_set_membership(half, vec2(1, 0), 1e-9));
  CHECK_THROWS_AS(fixed_point_set_membership(half, vec2(0, 0), 0.0), ValidationError);
}

TEST_CASE("certify_constants: contraction") {
  auto f = Contraction::affine_shrink(0.5, vec2(1, 2));
  auto cert = certify_constants(f, 500, 99);
  CHECK(cert.worst_ratio == doctest::Approx(0.5).epsilon(1e-9));  // affine: exact ratio
  CHECK_FALSE(cert.violation);

  auto c = Contraction::constant(vec2(3, 1));
  auto cert_c = certify_constants(c, 100, 99);
  CHECK(cert_c.worst_ratio == 0.0);
  CHECK(cert_c.declared_alpha == 0.0);
}

TEST_CASE("certify_constants: monotone operator") {
  auto a = MonotoneOperator::identity_minus(vec2(5, -3));
  auto cert = certify_constants(a, 500, 123);
  CHECK(cert.worst_lipschitz_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cert.worst_monotonicity_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(cert.violation);

  // diag(1,4): extreme eigenvalues 1 and 4 are the certified constants; the
  // sampled worst ratios approach them from inside as the sample count grows.
  auto spd = MonotoneOperator::spd((Matrix(2, 2) << 1, 0, 0, 4).finished());
  CHECK(spd.lipschitz() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(spd.strong_monotonicity() == doctest::Approx(1.0).epsilon(1e-12));
  auto small = certify_constants(spd, 50, 7);
  auto large = certify_constants(spd, 5000, 7);
  CHECK_FALSE(large.violation);
  CHECK(large.worst_lipschitz_ratio <= 4.0 * (1 + 1e-9));
  CHECK(large.worst_lipschitz_ratio >= small.worst_lipschitz_ratio);
  CHECK(large.worst_lipschitz_ratio > 3.9);
  CHECK(large.worst_monotonicity_ratio >= 1.0 * (1 - 1e-9));
  CHECK(large.worst_monotonicity_ratio <= small.worst_monotonicity_ratio);
  CHECK(large.worst_monotonicity_ratio < 1.1);

  // a deliberately misdeclared operator is flagged
  auto lying = MonotoneOperator::identity_minus_declared(vec2(0, 0), 0.5, 0.5);
  CHECK(certify_constants(lying, 100, 11).violation);
}

TEST_CASE("compose: single element and nested boxes") {
  std::mt19937_64 rng(31);
  auto t = random_projection(rng, 3);
  auto single = compose({t});
  for (int i = 0; i < 50; ++i) {
    Vector x = random_vector(rng, 3, 2.0);
    CHECK((single(x) - t(x)).norm() == 0.0);
  }

  // nested boxes: composition equals projection onto the inner box
  auto outer = NonexpansiveOp::box(Vector::Constant(2, -2.0), Vector::Constant(2, 2.0));
  auto inner = NonexpansiveOp::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  auto both = compose({inner, outer});  // outer applied first
  for (int i = 0; i < 200; ++i) {
    Vector x = random_vector(rng, 2, 3.0);
    Vector direct = x.cwiseMax(-1.0).cwiseMin(1.0);  // clamp oracle
    CHECK((both(x) - direct).norm() <= 1e-15);
  }
}

TEST_CASE("nonexpansiveness: 500 random pairs per catalog operator") {
  std::mt19937_64 rng(41);
  for (Index d : {2, 5}) {
    for (const auto& op : catalog_samples(rng, d)) {
      for (int i = 0; i < 500; ++i) {
        Vector x = random_vector(rng, d, 2.0);
        Vector y = random_vector(rng, d, 2.0);
        CHECK((op(x) - op(y)).norm() <= (x - y).norm() + 1e-9);
      }
    }
  }
}

TEST_CASE("projections: variational characterization, firm nonexpansiveness, idempotence") {
  std::mt19937_64 rng(43);
  for (Index d : {2, 4}) {
    for (int rep = 0; rep < 8; ++rep) {
      auto p = random_projection(rng, d);
      for (int i = 0; i < 100; ++i) {
        Vector x = random_vector(rng, d, 2.0);
        Vector px = p(x);

        // <x - Px, c - Px> <= 0 for any c in C; c sampled by projecting
        Vector c = p(random_vector(rng, d, 2.0));
        CHECK((x - px).dot(c - px) <= 1e-9);

        // firm nonexpansiveness
        Vector y = random_vector(rng, d, 2.0);
        Vector py = p(y);
        CHECK((px - py).squaredNorm() <= (px - py).dot(x - y) + 1e-9);

        // idempotence
        CHECK((p(px) - px).norm() <= 1e-9);
      }
    }
  }
}

TEST_CASE("firm nonexpansiveness flag is structural") {
  auto proj = NonexpansiveOp::ball(Vector::Zero(2), 1.0);
  CHECK(proj.is_firmly_nonexpansive());
  CHECK(NonexpansiveOp::identity(2).is_firmly_nonexpansive());
  CHECK(NonexpansiveOp::average(0.7, proj).is_firmly_nonexpansive());
  CHECK_FALSE(compose({proj, NonexpansiveOp::box(Vector::Zero(2), Vector::Ones(2))})
                  .is_firmly_nonexpansive());
}

TEST_CASE("linear contraction certifies its operator norm") {
  Matrix m(2, 2);
  m << 0.3, 0.4, 0.0, 0.5;
  auto f = Contraction::linear(m);
  CHECK(f.alpha() < 1.0);
  std::mt19937_64 rng(53);
  for (int i = 0; i < 200; ++i) {
    Vector x = random_vector(rng, 2), y = random_vector(rng, 2);
    CHECK((f(x) - f(y)).norm() <= f.alpha() * (x - y).norm() + 1e-9);
  }
}

TEST_CASE("average applies the convex combination") {
  auto ball = NonexpansiveOp::ball(Vector::Zero(2), 1.0);
  auto avg = NonexpansiveOp::average(0.25, ball);
  Vector x = vec2(2, 0);
  CHECK((avg(x) - (0.75 * x + 0.25 * ball(x))).norm() == 0.0);
}

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fixpoint {

/// Points of the ambient space R^d. Dense, double precision, value semantics:
/// every operation in this library returns a fresh vector and never mutates
/// its inputs, so concurrent use is safe without locking.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when two vectors (or a vector and an operator) disagree on the
/// ambient dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when operator or scheme data violates a construction invariant
/// (empty composition, box with lo > hi, mu outside its admissible range, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_same_dim(const Vector& x, const Vector& y, const char* where) {
  if (x.size() != y.size()) {
    throw DimensionError(std::string(where) + ": dimension mismatch (" +
                         std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  }
}

/// Euclidean inner product <x, y>.
inline double inner(const Vector& x, const Vector& y) {
  require_same_dim(x, y, "inner");
  return x.dot(y);
}

/// Induced norm sqrt(<x, x>).
inline double norm(const Vector& x) { return x.norm(); }

/// a*x + y, componentwise.
inline Vector axpy(double a, const Vector& x, const Vector& y) {
  require_same_dim(x, y, "axpy");
  return a * x + y;
}

inline bool is_finite(const Vector& x) { return x.allFinite(); }

}  // namespace fixpoint
